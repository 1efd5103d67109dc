#include "gridroute/sim_engine.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace gridroute {

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "; " : "") + items[i];
  return out;
}

bool series_ok(const Series& s, int steps) {
  if (s.constant) return s.values.size() == 1;
  return static_cast<int>(s.values.size()) == steps;
}

// Folds a battery charge of energy_wh (after efficiency) into the stored renewable share.
void charge_battery(BatteryAsset& b, double energy_wh, double share) {
  if (b.capacity_wh <= 0.0 || energy_wh <= 0.0) return;
  const double stored = b.soc * b.capacity_wh;
  const double next = stored + energy_wh;
  b.renewable_fraction = std::clamp((b.renewable_fraction * stored + share * energy_wh) / next, 0.0, 1.0);
  b.soc = std::clamp(next / b.capacity_wh, b.soc_min, b.soc_max);
}

void discharge_battery(BatteryAsset& b, double energy_wh) {
  if (b.capacity_wh <= 0.0 || energy_wh <= 0.0) return;
  b.soc = std::clamp(b.soc - energy_wh / b.capacity_wh, b.soc_min, b.soc_max);
}

double jittered(double base, double amplitude, std::mt19937_64& rng) {
  if (amplitude <= 0.0) return base;
  const double u = unit_uniform(rng());
  return std::max(0.0, base + amplitude * (2.0 * u - 1.0));
}

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

}  // namespace

double Series::at(int step) const {
  if (values.empty()) return 0.0;
  if (constant) return values.front();
  return values.at(static_cast<std::size_t>(step));
}

std::vector<HouseProfile> Scenario::profiles() const {
  std::vector<HouseProfile> out;
  out.reserve(houses.size());
  for (const auto& h : houses) out.push_back(h.profile);
  return out;
}

double unit_uniform(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

ScenarioInvalid::ScenarioInvalid(std::vector<std::string> violations)
    : std::runtime_error("scenario invalid: " + join(violations)), violations_(std::move(violations)) {}

std::vector<std::string> validate_scenario(const Scenario& sc) {
  std::vector<std::string> out;
  const auto profiles = sc.profiles();
  for (const auto& v : validate_topology(profiles, sc.assets, build_port_map(profiles, sc.assets))) {
    out.push_back(v.code + ": " + v.message);
  }
  if (sc.steps < 0) out.push_back("steps: must be nonnegative");
  if (!(sc.step_duration_s > 0.0)) out.push_back("step_duration_s: must be positive");

  std::set<int> house_ports;
  for (const auto& h : sc.houses) {
    const auto tag = house_entity(h.profile.house_id);
    house_ports.insert(h.profile.port_id);
    if (!sc.layout.has_port(h.profile.port_id)) {
      out.push_back("layout: " + tag + " port " + std::to_string(h.profile.port_id) + " not on layout " +
                    sc.layout.name());
    }
    if (!series_ok(h.generation_w, sc.steps)) {
      out.push_back("series_length: " + tag + " generation has " + std::to_string(h.generation_w.values.size()) +
                    " values, expected " + std::to_string(sc.steps));
    }
    if (!series_ok(h.demand_w, sc.steps)) {
      out.push_back("series_length: " + tag + " demand has " + std::to_string(h.demand_w.values.size()) +
                    " values, expected " + std::to_string(sc.steps));
    }
    for (double v : h.generation_w.values) {
      if (!(v >= 0.0)) out.push_back("series_value: " + tag + " generation must be nonnegative");
    }
    for (double v : h.demand_w.values) {
      if (!(v >= 0.0)) out.push_back("series_value: " + tag + " demand must be nonnegative");
    }
    if (!(h.jitter_w >= 0.0)) out.push_back("jitter: " + tag + " jitter must be nonnegative");
  }
  if (!series_ok(sc.price_per_kwh, sc.steps)) {
    out.push_back("series_length: prices have " + std::to_string(sc.price_per_kwh.values.size()) +
                  " values, expected " + std::to_string(sc.steps));
  }
  if (sc.assets.port_id != 0 && !sc.layout.has_port(sc.assets.port_id)) {
    out.push_back("layout: community port " + std::to_string(sc.assets.port_id) + " not on layout");
  }

  std::set<int> prio_ports;
  for (const auto& p : sc.priorities) {
    if (!house_ports.count(p.port)) out.push_back("priority: port " + std::to_string(p.port) + " is not a house");
    if (p.rank < 1) out.push_back("priority: rank must be positive for port " + std::to_string(p.port));
    if (!prio_ports.insert(p.port).second) {
      out.push_back("priority: port " + std::to_string(p.port) + " listed twice");
    }
    if (p.demand_w && !(*p.demand_w >= 0.0)) out.push_back("priority: demand must be nonnegative");
  }
  for (int s : sc.emergency_steps) {
    if (s < 0 || s >= sc.steps) out.push_back("emergency: step " + std::to_string(s) + " out of range");
  }
  if (!sc.emergency_steps.empty() && (sc.assets.port_id == 0)) {
    out.push_back("emergency: emergency steps need a community port as supply");
  }
  for (const auto& [step, pairs] : sc.manual_routes) {
    if (step < 0 || step >= sc.steps) out.push_back("manual_routes: step " + std::to_string(step) + " out of range");
    if (sc.emergency_steps.count(step)) {
      out.push_back("manual_routes: step " + std::to_string(step) + " is also an emergency step");
    }
    std::set<int> seen;
    for (const auto& [a, b] : pairs) {
      for (int p : {a, b}) {
        if (!sc.layout.has_port(p)) {
          out.push_back("manual_routes: port " + std::to_string(p) + " not on layout");
        } else if (!seen.insert(p).second) {
          out.push_back("manual_routes: step " + std::to_string(step) + " uses port " + std::to_string(p) +
                        " twice");
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

SimulationResult run(const Scenario& sc, std::optional<int> steps_override) {
  Scenario scenario = sc;
  if (steps_override) scenario.steps = *steps_override;
  auto violations = validate_scenario(scenario);
  if (!violations.empty()) throw ScenarioInvalid(std::move(violations));

  const double dt_h = scenario.step_duration_h();
  const MatrixLayout& layout = scenario.layout;
  const int hub = scenario.assets.port_id;

  SimulationResult result;
  result.scenario_name = scenario.name;
  result.layout_name = layout.name();
  result.step_duration_h = dt_h;
  result.seed = scenario.seed;
  result.requested_steps = scenario.steps;
  for (const auto& h : scenario.houses) result.accounts.push_back(h.profile.port_id);
  if (hub != 0) result.accounts.push_back(hub);
  std::sort(result.accounts.begin(), result.accounts.end());
  result.hydrogen_params = {scenario.assets.electrolyzer.efficiency, scenario.assets.fuel_cell.efficiency,
                            scenario.assets.electrolyzer.lhv_wh_per_kg};
  result.initial_hydrogen = scenario.assets.hydrogen;
  result.ledger = LedgerState(result.accounts, result.hydrogen_params);
  result.ledger.seed_hydrogen(scenario.assets.hydrogen.total_kg, scenario.assets.hydrogen.renewable_kg);

  CommunityAssets assets = scenario.assets;
  std::mt19937_64 rng(scenario.seed);

  for (int k = 0; k < scenario.steps; ++k) {
    StepRecord rec;
    rec.step_index = k;
    rec.price_per_kwh = scenario.price_per_kwh.at(k);

    for (const auto& h : scenario.houses) {
      const double gen = jittered(h.generation_w.at(k), h.jitter_w, rng);
      const double dem = jittered(h.demand_w.at(k), h.jitter_w, rng);
      rec.injections.push_back(net_injection(h.profile, dem, gen));
    }
    std::sort(rec.injections.begin(), rec.injections.end(),
              [](const NetInjection& a, const NetInjection& b) { return a.port_id < b.port_id; });

    assets.hydrogen = {result.ledger.hydrogen_total_kg(), result.ledger.hydrogen_renewable_kg()};
    PlanContext ctx;
    ctx.step_index = k;
    ctx.step_duration_h = dt_h;
    ctx.renewable_only_p2g = scenario.renewable_only_p2g;
    ctx.fc_inherits_renewable = scenario.fc_inherits_renewable;

    if (scenario.emergency_steps.count(k)) {
      EmergencySupply supply;
      supply.supply_port = hub;
      supply.battery_w = battery_discharge_headroom_w(assets.battery, dt_h);
      supply.fc_w = fuel_cell_headroom_w(assets, dt_h);
      supply.available_w = supply.battery_w + supply.fc_w;
      supply.battery_share = assets.battery.renewable_fraction;
      if (scenario.fc_inherits_renewable && assets.hydrogen.total_kg > 0.0) {
        supply.fc_share = std::clamp(assets.hydrogen.renewable_kg / assets.hydrogen.total_kg, 0.0, 1.0);
      }
      std::vector<PriorityClass> loads;
      for (const auto& p : scenario.priorities) {
        double demand = 0.0;
        if (p.demand_w) {
          demand = *p.demand_w;
        } else {
          for (const auto& inj : rec.injections) {
            if (inj.port_id == p.port) demand = std::max(0.0, -inj.power_w);
          }
        }
        loads.push_back({p.port, p.rank, demand});
      }
      rec.plan = plan_emergency(supply, loads, layout, k);
    } else if (auto it = scenario.manual_routes.find(k); it != scenario.manual_routes.end()) {
      auto plan = plan_manual(rec.injections, it->second, layout, ctx);
      if (!plan) {
        std::string pairs;
        for (const auto& [a, b] : it->second) pairs += " " + std::to_string(a) + "<->" + std::to_string(b);
        result.runtime_error = "step " + std::to_string(k) + ": layout " + layout.name() +
                               " cannot realize requested pairing" + pairs;
        return result;
      }
      rec.plan = std::move(*plan);
    } else {
      rec.plan = plan_normal(rec.injections, assets, layout, ctx);
    }

    rec.violations = validate_states(layout, rec.plan.switch_states, rec.plan.roles);
    if (has_errors(rec.violations)) {
      std::vector<std::string> msgs;
      for (const auto& v : rec.violations) {
        if (v.severity == Severity::Error) msgs.push_back(v.message);
      }
      result.runtime_error = "step " + std::to_string(k) + ": " + join(msgs);
      return result;
    }

    const auto routed = rec.plan.port_injections();
    std::vector<NetInjection> router_side;
    for (int p = 1; p <= layout.n_ports(); ++p) {
      auto r = routed.find(p);
      router_side.push_back({p, r == routed.end() ? 0.0 : r->second, 0.0});
    }
    rec.flows = solve_step(connectivity(layout, rec.plan.switch_states), router_side);
    if (!rec.flows.all_feasible()) {
      result.runtime_error = "step " + std::to_string(k) + ": power flow has an infeasible group";
      result.steps.push_back(std::move(rec));
      return result;
    }
    try {
      record_step(result.ledger, rec.plan, rec.flows, dt_h, rec.price_per_kwh);
    } catch (const FlowMismatch& e) {
      result.runtime_error = "step " + std::to_string(k) + ": " + e.what();
      result.steps.push_back(std::move(rec));
      return result;
    }

    double battery_in_share = 0.0;
    double battery_in = 0.0;
    for (const auto& in : rec.plan.storage_inputs) {
      battery_in += in.battery_w;
      battery_in_share += in.battery_w * in.renewable_share;
    }
    if (rec.plan.battery_charge_w() > 0.0) {
      const double share = battery_in > 0.0 ? battery_in_share / battery_in : 0.0;
      charge_battery(assets.battery, rec.plan.battery_charge_w() * dt_h * assets.battery.charge_efficiency, share);
    }
    discharge_battery(assets.battery, rec.plan.battery_discharge_w() * dt_h);

    double house_side = 0.0;
    for (const auto& f : rec.flows.flows) {
      if (f.port_id != hub) house_side += f.power_w;
    }
    rec.balance_residual_w =
        house_side - rec.plan.battery_command_w - rec.plan.p2g_input_w + rec.plan.fc_output_w;
    rec.battery_soc = assets.battery.soc;
    rec.hydrogen_kg = result.ledger.hydrogen_total_kg();
    rec.hydrogen_renewable_kg = result.ledger.hydrogen_renewable_kg();
    result.steps.push_back(std::move(rec));
  }
  return result;
}

RecordedRun record_of(const SimulationResult& result) {
  RecordedRun r;
  r.step_duration_h = result.step_duration_h;
  r.hydrogen_params = result.hydrogen_params;
  r.initial_hydrogen = result.initial_hydrogen;
  r.accounts = result.accounts;
  for (const auto& s : result.steps) r.steps.push_back({s.plan, s.flows.flows, s.price_per_kwh});
  r.trades = result.ledger.trades();
  r.batches = result.ledger.batches();
  r.draws = result.ledger.draws();
  r.balances = result.ledger.balances();
  return r;
}

ReplayReport replay(const RecordedRun& run) {
  ReplayReport report;
  LedgerState derived(run.accounts, run.hydrogen_params);
  derived.seed_hydrogen(run.initial_hydrogen.total_kg, run.initial_hydrogen.renewable_kg);
  for (const auto& s : run.steps) {
    StepFlows flows;
    flows.flows = s.flows;
    try {
      check_flows_match(s.plan, flows);
    } catch (const FlowMismatch& e) {
      report.divergences.push_back("step " + std::to_string(s.plan.step_index) + " flows: " + e.what());
    }
    append_step(derived, s.plan, run.step_duration_h, s.price_per_kwh);
  }

  constexpr double tol = kFlowMatchTolerance;
  const auto& want_t = derived.trades();
  for (std::size_t i = 0; i < std::max(want_t.size(), run.trades.size()); ++i) {
    const std::string tag = "trade #" + std::to_string(i);
    if (i >= want_t.size()) {
      report.divergences.push_back(tag + ": recorded but not implied by any pairing");
      continue;
    }
    if (i >= run.trades.size()) {
      report.divergences.push_back(tag + ": missing from the recorded ledger");
      continue;
    }
    const auto& w = want_t[i];
    const auto& g = run.trades[i];
    if (w.step_index != g.step_index || w.from_port != g.from_port || w.to_port != g.to_port ||
        !near(w.energy_wh, g.energy_wh, tol) || !near(w.price_per_kwh, g.price_per_kwh, tol) ||
        !near(w.renewable_share, g.renewable_share, tol)) {
      report.divergences.push_back(tag + " (step " + std::to_string(g.step_index) + "): recorded " +
                                   format_watts(g.energy_wh) + " Wh, physics implies " + format_watts(w.energy_wh) +
                                   " Wh");
    }
  }

  const auto& want_b = derived.batches();
  for (std::size_t i = 0; i < std::max(want_b.size(), run.batches.size()); ++i) {
    const std::string tag = "hydrogen batch #" + std::to_string(i);
    if (i >= want_b.size() || i >= run.batches.size()) {
      report.divergences.push_back(tag + ": count mismatch");
      continue;
    }
    const auto& w = want_b[i];
    const auto& g = run.batches[i];
    if (w.step_index != g.step_index || !near(w.energy_in_wh, g.energy_in_wh, tol) ||
        !near(w.renewable_fraction, g.renewable_fraction, tol) || !near(w.mass_kg, g.mass_kg, 1e-12)) {
      report.divergences.push_back(tag + " (step " + std::to_string(g.step_index) + "): differs from P2G input");
    }
  }

  const auto& want_d = derived.draws();
  for (std::size_t i = 0; i < std::max(want_d.size(), run.draws.size()); ++i) {
    const std::string tag = "hydrogen draw #" + std::to_string(i);
    if (i >= want_d.size() || i >= run.draws.size()) {
      report.divergences.push_back(tag + ": count mismatch");
      continue;
    }
    const auto& w = want_d[i];
    const auto& g = run.draws[i];
    if (w.step_index != g.step_index || !near(w.energy_out_wh, g.energy_out_wh, tol) ||
        !near(w.mass_kg, g.mass_kg, 1e-12) || !near(w.renewable_kg, g.renewable_kg, 1e-12)) {
      report.divergences.push_back(tag + " (step " + std::to_string(g.step_index) + "): differs from fuel-cell output");
    }
  }

  if (run.balances) {
    for (const auto& [port, want] : derived.balances()) {
      auto it = run.balances->find(port);
      if (it == run.balances->end()) {
        report.divergences.push_back("balance port " + std::to_string(port) + ": missing");
        continue;
      }
      const auto& got = it->second;
      if (!near(want.exported_wh, got.exported_wh, tol) || !near(want.imported_wh, got.imported_wh, tol) ||
          want.currency != got.currency) {
        report.divergences.push_back("balance port " + std::to_string(port) + ": differs from re-derived ledger");
      }
    }
    for (const auto& [port, got] : *run.balances) {
      if (!derived.balances().count(port)) {
        report.divergences.push_back("balance port " + std::to_string(port) + ": unknown account");
      }
    }
  }
  return report;
}

Scenario mode_ab_scenario() {
  Scenario sc;
  sc.name = "modeAB";
  sc.layout = MatrixLayout::prototype4();
  sc.steps = 2;
  sc.step_duration_s = 60.0;
  sc.seed = 0;
  sc.price_per_kwh = Series::of(0.2);
  for (int id = 1; id <= 3; ++id) {
    HouseScenario h;
    h.profile.house_id = id;
    h.profile.port_id = id;
    h.profile.devices = {make_device(DeviceKind::PhotovoltaicSource, 500.0), make_device(DeviceKind::HouseLoad, 500.0),
                         make_device(DeviceKind::GridTie, 2000.0)};
    sc.houses.push_back(h);
  }
  // Mode A: house 3 exports 500 W to house 2. Mode B: house 1 exports to house 3.
  sc.houses[0].generation_w = Series::of({0.0, 500.0});
  sc.houses[0].demand_w = Series::of({0.0, 0.0});
  sc.houses[1].generation_w = Series::of({0.0, 0.0});
  sc.houses[1].demand_w = Series::of({500.0, 0.0});
  sc.houses[2].generation_w = Series::of({500.0, 0.0});
  sc.houses[2].demand_w = Series::of({0.0, 500.0});
  sc.assets.port_id = 4;
  sc.assets.battery = BatteryAsset{0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0};
  return sc;
}

Scenario random_scenario(std::uint64_t seed, int steps, const MatrixLayout& layout) {
  std::mt19937_64 rng(seed);
  auto uni = [&](double lo, double hi) { return lo + (hi - lo) * unit_uniform(rng()); };

  Scenario sc;
  sc.name = "random-" + std::to_string(seed);
  sc.layout = layout;
  sc.steps = steps;
  sc.seed = seed;
  sc.step_duration_s = 60.0 * std::floor(uni(1.0, 16.0));
  const int n_houses = layout.n_ports() - 1;
  for (int id = 1; id <= n_houses; ++id) {
    HouseScenario h;
    h.profile.house_id = id;
    h.profile.port_id = id;
    h.profile.devices = {make_device(DeviceKind::PhotovoltaicSource, uni(500.0, 3000.0)),
                         make_device(DeviceKind::HouseLoad, 3000.0), make_device(DeviceKind::GridTie, 5000.0)};
    if (uni(0.0, 1.0) < 0.4) {
      h.profile.devices.push_back(make_device(DeviceKind::StationaryBattery, uni(200.0, 1500.0), 5000.0));
    }
    std::vector<double> gen(static_cast<std::size_t>(steps)), dem(static_cast<std::size_t>(steps));
    for (int k = 0; k < steps; ++k) {
      gen[static_cast<std::size_t>(k)] = uni(0.0, 1.0) < 0.3 ? 0.0 : uni(0.0, 2500.0);
      dem[static_cast<std::size_t>(k)] = uni(0.0, 2000.0);
    }
    h.generation_w = Series::of(std::move(gen));
    h.demand_w = Series::of(std::move(dem));
    h.jitter_w = uni(0.0, 1.0) < 0.5 ? uni(0.0, 100.0) : 0.0;
    sc.houses.push_back(std::move(h));
  }
  sc.assets.port_id = layout.n_ports();
  sc.assets.battery.capacity_wh = uni(1000.0, 10000.0);
  sc.assets.battery.max_charge_w = uni(200.0, 2000.0);
  sc.assets.battery.max_discharge_w = uni(200.0, 2000.0);
  sc.assets.battery.soc_min = 0.1;
  sc.assets.battery.soc_max = 0.9;
  sc.assets.battery.soc = uni(0.1, 0.9);
  sc.assets.battery.charge_efficiency = uni(0.85, 1.0);
  sc.assets.electrolyzer.max_input_w = uni(0.0, 2000.0);
  sc.assets.fuel_cell.max_output_w = uni(0.0, 1500.0);
  sc.assets.hydrogen.total_kg = uni(0.0, 0.2);
  sc.assets.hydrogen.renewable_kg = sc.assets.hydrogen.total_kg * uni(0.0, 1.0);
  std::vector<double> prices(static_cast<std::size_t>(steps));
  for (auto& p : prices) p = std::round(uni(0.05, 0.5) * 100.0) / 100.0;
  sc.price_per_kwh = Series::of(std::move(prices));
  for (int id = 1; id <= n_houses; ++id) {
    if (uni(0.0, 1.0) < 0.7) sc.priorities.push_back({id, 1 + static_cast<int>(uni(0.0, 3.0)), std::nullopt});
  }
  for (int k = 0; k < steps; ++k) {
    if (uni(0.0, 1.0) < 0.1) sc.emergency_steps.insert(k);
  }
  sc.renewable_only_p2g = uni(0.0, 1.0) < 0.3;
  sc.fc_inherits_renewable = uni(0.0, 1.0) < 0.7;
  return sc;
}

}  // namespace gridroute
