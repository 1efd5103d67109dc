// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "gridroute/cli_runner.hpp"
#include "gridroute/scenario_io.hpp"
#include "oracles.hpp"

using namespace gridroute;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Expect {
  int port;
  double power_w;
  PhaseRelation phase;
};

void check_mode(const cli::ModeReport& r, const std::vector<Expect>& want, Outcome& o) {
  for (const auto& e : want) {
    const auto& p = r.port(e.port);
    const double tol = e.power_w == 0.0 ? 0.01 * 500.0 : 0.01 * std::abs(e.power_w);
    if (std::abs(p.average_power_w - e.power_w) > tol) {
      o.fail("port " + std::to_string(e.port) + " power " + format_watts(p.average_power_w));
    }
    if (p.phase != e.phase) o.fail("port " + std::to_string(e.port) + " phase " + to_string(p.phase));
  }
}

Outcome mode_a() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  std::ostringstream out, err;
  cli::ExperimentOptions opts;
  opts.mode = "A";
  opts.out_dir = (fs::temp_directory_path() / "gridroute_accept_A").string();
  const int rc = cli::cmd_replicate_experiment(opts, out, err);
  const auto r = cli::replicate_mode('A');
  const double dt = seconds_since(t0);
  if (rc != 0) o.fail("exit " + std::to_string(rc));
  check_mode(r, {{1, 0.0, PhaseRelation::NoCurrent}, {2, -500.0, PhaseRelation::AntiPhase},
                 {3, 500.0, PhaseRelation::InPhase}},
             o);
  if (dt >= 1.0) o.fail("runtime " + std::to_string(dt) + " s");
  if (o.pass) o.detail = "p1=" + format_watts(r.port(1).average_power_w) + " p2=" +
                         format_watts(r.port(2).average_power_w) + " p3=" + format_watts(r.port(3).average_power_w);
  fs::remove_all(opts.out_dir);
  return o;
}

Outcome mode_b() {
  Outcome o;
  const auto a = cli::replicate_mode('A');
  const auto b = cli::replicate_mode('B');
  check_mode(b, {{1, 500.0, PhaseRelation::InPhase}, {2, 0.0, PhaseRelation::NoCurrent},
                 {3, -500.0, PhaseRelation::AntiPhase}},
             o);
  const double p3a = a.port(3).average_power_w;
  const double p3b = b.port(3).average_power_w;
  if (!(p3a > 0.0 && p3b < 0.0)) o.fail("port 3 does not reverse");
  if (o.pass) o.detail = "port3 " + format_watts(p3a) + " -> " + format_watts(p3b);
  return o;
}

Outcome switch_states() {
  Outcome o;
  const auto p = MatrixLayout::prototype4();
  const auto a = states_for_pairs(p, {{3, 2}});
  const auto b = states_for_pairs(p, {{1, 3}});
  const std::string sa = a ? format_states(*a) : "none";
  const std::string sb = b ? format_states(*b) : "none";
  if (sa != "(OFF,OFF,ON,OFF)") o.fail("mode A " + sa);
  if (sb != "(ON,OFF,OFF,OFF)") o.fail("mode B " + sb);
  if (o.pass) o.detail = "A " + sa + " B " + sb;
  return o;
}

Outcome connectivity_oracle() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  int checked = 0;
  for (const auto& layout : {MatrixLayout::prototype4(), MatrixLayout::full4x2()}) {
    const unsigned long long n = 1ULL << layout.switches().size();
    for (unsigned long long m = 0; m < n; ++m) {
      const auto s = SwitchStateVector::from_mask(layout, m);
      if (connectivity(layout, s).groups != oracle::reach_groups(layout, s)) {
        o.fail(layout.name() + " mask " + std::to_string(m));
      }
      ++checked;
    }
  }
  const auto full = MatrixLayout::full4x2();
  const std::vector<std::vector<std::pair<int, int>>> pairings{
      {{1, 2}, {3, 4}}, {{1, 3}, {2, 4}}, {{1, 4}, {2, 3}}};
  for (const auto& pr : pairings) {
    const auto s = states_for_pairs(full, pr);
    std::vector<std::vector<int>> want;
    for (const auto& [a, b] : pr) want.push_back({std::min(a, b), std::max(a, b)});
    std::sort(want.begin(), want.end());
    if (!s || oracle::reach_groups(full, *s) != want) {
      o.fail("pairing " + std::to_string(pr[0].first) + std::to_string(pr[0].second) + "|" +
             std::to_string(pr[1].first) + std::to_string(pr[1].second));
    }
  }
  const double dt = seconds_since(t0);
  if (checked != 16 + 256) o.fail("checked " + std::to_string(checked));
  if (dt >= 1.0) o.fail("runtime " + std::to_string(dt) + " s");
  if (o.pass) o.detail = std::to_string(checked) + " state vectors, 3 pairings";
  return o;
}

Outcome conservation() {
  Outcome o;
  double worst_group = 0.0;
  double worst_residual = 0.0;
  for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
    const auto layout = seed % 2 ? MatrixLayout::full4x2() : MatrixLayout::prototype4();
    const auto sc = random_scenario(seed, 20, layout);
    const auto r = run(sc);
    if (!r.complete()) o.fail("seed " + std::to_string(seed) + ": " + *r.runtime_error);
    for (const auto& s : r.steps) {
      for (const auto& g : s.flows.groups) {
        double sum = 0.0;
        for (int p : g.group) sum += s.flows.flow(p)->power_w;
        worst_group = std::max(worst_group, std::abs(sum));
      }
      worst_residual = std::max(worst_residual, std::abs(s.balance_residual_w));
    }
  }
  if (worst_group > 1e-9) o.fail("group sum " + std::to_string(worst_group));
  if (worst_residual > 1e-9) o.fail("residual " + std::to_string(worst_residual));
  if (o.pass) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "1000 scenarios, max |group sum| %.3g W, max residual %.3g W", worst_group,
                  worst_residual);
    o.detail = buf;
  }
  return o;
}

Outcome waveform() {
  Outcome o;
  int cases = 0;
  double worst = 0.0;
  for (double v : {100.0, 120.0, 200.0, 230.0, 400.0}) {
    for (double i : {0.1, 1.0, 2.5, 10.0, 50.0}) {
      for (double phi : {0.0, 0.3, 0.8, 1.2, 2.0, 2.7, std::numbers::pi}) {
        for (double fs_per_cycle : {100.0, 200.0}) {
          const double f = 60.0;
          const auto frame = synth(v, f, i, phi, 0.1, f * fs_per_cycle);  // 6 whole cycles
          const double want = v * i * std::cos(phi);
          const double rel = std::abs(average_power(frame) - want) / (v * i);
          worst = std::max(worst, rel);
          ++cases;
        }
      }
    }
  }
  if (cases < 100) o.fail("only " + std::to_string(cases) + " cases");
  if (worst > 1e-6) o.fail("relative error " + std::to_string(worst));
  if (o.pass) {
    char buf[80];
    std::snprintf(buf, sizeof buf, "%d cases, max relative error %.3g", cases, worst);
    o.detail = buf;
  }
  return o;
}

Outcome hydrogen() {
  Outcome o;
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const HydrogenParams params;
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    LedgerState s({1, 2, 3, 4}, params);
    double sum_e = 0.0;
    double sum_re = 0.0;
    const int steps = 1 + static_cast<int>(rng() % 30);
    for (int step = 0; step < steps; ++step) {
      DispatchPlan plan;
      plan.step_index = step;
      std::vector<std::pair<double, double>> parts;
      const int n_inputs = 1 + static_cast<int>(rng() % 3);
      for (int k = 0; k < n_inputs; ++k) {
        const double w = 1.0 + 2000.0 * u(rng);
        const double share = (rng() % 3 == 0) ? 1.0 : u(rng);
        plan.pairings.push_back({k + 1, 4, w, share});
        plan.storage_inputs.push_back({k + 1, 0.0, w, share});
        plan.p2g_input_w += w;
        parts.emplace_back(w * 1.0, share);
      }
      append_step(s, plan, 1.0, 0.1);
      const auto& b = s.batches().back();
      const double want_f = oracle::weighted_share(parts);
      worst = std::max(worst, std::abs(b.renewable_fraction - want_f));
      for (const auto& [e, share] : parts) {
        sum_e += e;
        sum_re += e * share;
      }
    }
    const auto inv = renewable_inventory(s);
    const double closed_total = params.p2g_efficiency * sum_e / params.lhv_wh_per_kg;
    const double closed_renew = params.p2g_efficiency * sum_re / params.lhv_wh_per_kg;
    worst = std::max(worst, std::abs(inv.total_kg - closed_total) / std::max(closed_total, 1e-300));
    worst = std::max(worst, std::abs(inv.renewable_kg - closed_renew) / std::max(closed_total, 1e-300));

    // Draws against the independent fold.
    for (int d = 0; d < 3; ++d) s.draw(steps + d, 100.0 * u(rng));
    const auto fold = oracle::fold_inventory(s.batches(), s.draws());
    const auto after = renewable_inventory(s);
    worst = std::max(worst, std::abs(after.total_kg - fold.total_kg) / closed_total);
    worst = std::max(worst, std::abs(after.renewable_kg - fold.renewable_kg) / closed_total);
  }
  if (worst > 1e-12) o.fail("relative deviation " + std::to_string(worst));
  if (o.pass) {
    char buf[80];
    std::snprintf(buf, sizeof buf, "200 ledgers, max relative deviation %.3g", worst);
    o.detail = buf;
  }
  return o;
}

Outcome emergency() {
  Outcome o;
  std::mt19937_64 rng(8080);
  int trials = 0;
  for (int n = 0; n <= 12; ++n) {
    for (int t = 0; t < 40; ++t) {
      const auto layout = MatrixLayout::star(std::max(n + 1, 2));
      std::vector<PriorityClass> loads;
      for (int p = 1; p <= n; ++p) {
        loads.push_back({p, 1 + static_cast<int>(rng() % 5), static_cast<double>(1 + rng() % 1500)});
      }
      const double supply = static_cast<double>(rng() % 8000);
      const auto plan = plan_emergency({layout.n_ports(), supply, supply, 0, 1.0, 0, 0}, loads, layout);
      if (plan.served_ports != oracle::emergency_prefix(supply, layout.n_ports(), loads, layout)) {
        o.fail("served set differs, n=" + std::to_string(n));
      }
      const auto groups = oracle::reach_groups(layout, plan.switch_states);
      for (int b : plan.blocked_ports) {
        for (const auto& g : groups) {
          if (std::find(g.begin(), g.end(), b) != g.end() && g.size() != 1) {
            o.fail("load " + std::to_string(b) + " energized while unserved");
          }
        }
      }
      ++trials;
    }
  }
  // Layout reach on the prototype: the supply's bus limits who can be joined.
  const auto proto = MatrixLayout::prototype4();
  std::mt19937_64 rng2(9);
  for (int t = 0; t < 200; ++t) {
    std::vector<PriorityClass> loads;
    for (int p : {1, 2, 4}) loads.push_back({p, 1 + static_cast<int>(rng2() % 3), static_cast<double>(rng2() % 800)});
    const double supply = static_cast<double>(rng2() % 2000);
    const auto plan = plan_emergency({3, supply, supply, 0, 1.0, 0, 0}, loads, proto);
    if (plan.served_ports != oracle::emergency_prefix(supply, 3, loads, proto)) o.fail("prototype served set differs");
    ++trials;
  }
  if (o.pass) o.detail = std::to_string(trials) + " load sets up to 12 loads";
  return o;
}

Outcome determinism() {
  Outcome o;
  const auto base = fs::temp_directory_path() / "gridroute_accept_det";
  fs::remove_all(base);
  int scenarios = 0;
  std::mt19937_64 rng(123);
  std::size_t faults_total = 0;
  for (std::uint64_t seed : {1u, 2u, 17u, 256u, 9001u}) {
    for (const auto& layout : {MatrixLayout::prototype4(), MatrixLayout::full4x2()}) {
      const auto sc = random_scenario(seed, 300, layout);
      const auto a = base / ("a" + std::to_string(scenarios));
      const auto b = base / ("b" + std::to_string(scenarios));
      write_outputs(a, run(sc), sc.layout);
      write_outputs(b, run(sc), sc.layout);
      for (const char* f : {"flows.csv", "ledger.ndjson"}) {
        if (slurp(a / f) != slurp(b / f)) o.fail(std::string(f) + " differs for seed " + std::to_string(seed));
      }
      const auto rec = read_recorded_run(a);
      if (replay(rec).count() != 0) o.fail("divergences on untampered outputs");

      const std::size_t nt = rec.trades.size(), nb = rec.batches.size(), nd = rec.draws.size();
      const std::size_t total = nt + nb + nd;
      for (std::size_t k : {std::size_t{1}, std::size_t{3}, std::size_t{10}}) {
        if (k > total) continue;
        auto bad = rec;
        std::vector<std::size_t> idx(total);
        for (std::size_t i = 0; i < total; ++i) idx[i] = i;
        std::shuffle(idx.begin(), idx.end(), rng);
        for (std::size_t f = 0; f < k; ++f) {
          const std::size_t i = idx[f];
          if (i < nt) {
            bad.trades[i].energy_wh += 0.5;
          } else if (i < nt + nb) {
            bad.batches[i - nt].renewable_fraction = bad.batches[i - nt].renewable_fraction > 0.5 ? 0.0 : 1.0;
          } else {
            bad.draws[i - nt - nb].mass_kg *= 2.0;
          }
        }
        const auto n = replay(bad).count();
        if (n != k) o.fail(std::to_string(k) + " faults gave " + std::to_string(n) + " divergences");
        faults_total += k;
      }
      ++scenarios;
    }
  }
  fs::remove_all(base);
  if (o.pass) o.detail = std::to_string(scenarios) + " scenarios, " + std::to_string(faults_total) + " injected faults";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"mode A replication", mode_a},
      {"mode B replication and port 3 reversal", mode_b},
      {"switch-state fidelity", switch_states},
      {"connectivity oracle equivalence", connectivity_oracle},
      {"conservation", conservation},
      {"waveform analytics", waveform},
      {"hydrogen provenance", hydrogen},
      {"emergency priority", emergency},
      {"determinism and replay", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    if (!o.pass) ++failures;
    std::printf("criterion %zu: %s  %s  (%s)\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first,
                o.detail.c_str());
  }
  return failures == 0 ? 0 : 1;
}
