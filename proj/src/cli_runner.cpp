#include "gridroute/cli_runner.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "json.hpp"

#include "gridroute/scenario_io.hpp"
#include "gridroute/sim_engine.hpp"

namespace gridroute::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kExperimentVrms = 200.0;
constexpr double kExperimentFreqHz = 60.0;
constexpr double kRatedW = 500.0;
constexpr double kRelTolerance = 0.01;
constexpr double kIdleToleranceW = 5.0;

void report_error(std::ostream& err, const std::string& kind, const std::string& message,
                  const std::vector<std::string>& violations = {}) {
  json j{{"error", kind}, {"message", message}};
  if (!violations.empty()) j["violations"] = violations;
  err << j.dump() << '\n';
}

std::optional<Scenario> load_or_report(const std::string& path, std::ostream& err) {
  try {
    return load_scenario(path);
  } catch (const ScenarioParseError& e) {
    report_error(err, "parse", e.what());
  }
  return std::nullopt;
}

struct Expectation {
  double power_w;
  PhaseRelation phase;
};

Expectation expected_for(char mode, int port) {
  // Mode A: house 3 supplies house 2. Mode B: house 1 supplies house 3.
  static const Expectation a[] = {{0.0, PhaseRelation::NoCurrent},
                                  {-kRatedW, PhaseRelation::AntiPhase},
                                  {kRatedW, PhaseRelation::InPhase}};
  static const Expectation b[] = {{kRatedW, PhaseRelation::InPhase},
                                  {0.0, PhaseRelation::NoCurrent},
                                  {-kRatedW, PhaseRelation::AntiPhase}};
  return (mode == 'A' ? a : b)[port - 1];
}

json mode_json(const ModeReport& r) {
  json ports = json::array();
  for (const auto& p : r.ports) {
    ports.push_back({{"port", p.port},
                     {"expected_w", p.expected_w},
                     {"expected_phase", to_string(p.expected_phase)},
                     {"scheduled_w", p.scheduled_w},
                     {"average_power_w", p.average_power_w},
                     {"i_rms_a", p.i_rms_a},
                     {"phase", to_string(p.phase)},
                     {"pass", p.pass}});
  }
  return {{"mode", std::string(1, r.mode)},
          {"step", r.step},
          {"switch_states", r.switch_states},
          {"ports", ports},
          {"pass", r.pass}};
}

}  // namespace

void configure_logging() {
  auto logger = spdlog::get("gridroute");
  if (!logger) {
    logger = spdlog::stderr_color_mt("gridroute");
    spdlog::set_default_logger(logger);
  }
  auto level = spdlog::level::warn;
  if (const char* env = std::getenv("GRIDROUTE_LOG"); env && *env) level = spdlog::level::from_str(env);
  spdlog::set_level(level);
}

int cmd_simulate(const SimulateOptions& opts, std::ostream& out, std::ostream& err) {
  auto sc = load_or_report(opts.scenario, err);
  if (!sc) return kExitInvalid;
  if (opts.seed) sc->seed = *opts.seed;

  SimulationResult result;
  try {
    result = run(*sc, opts.steps);
  } catch (const ScenarioInvalid& e) {
    report_error(err, "validation", "scenario failed validation", e.violations());
    return kExitInvalid;
  }
  spdlog::info("simulated {} of {} steps on layout {}", result.steps.size(), result.requested_steps,
               result.layout_name);

  try {
    write_outputs(opts.out_dir, result, sc->layout);
  } catch (const std::exception& e) {
    report_error(err, "io", e.what());
    return kExitViolations;
  }

  if (!result.complete()) {
    report_error(err, "infeasible", *result.runtime_error,
                 {"runtime_infeasible: " + *result.runtime_error + " (partial outputs in " + opts.out_dir + ")"});
    return kExitInfeasible;
  }
  out << "wrote " << result.steps.size() << " steps to " << opts.out_dir << '\n';
  return kExitOk;
}

int cmd_validate(const std::string& scenario, std::ostream& out, std::ostream& err) {
  auto sc = load_or_report(scenario, err);
  if (!sc) return kExitInvalid;
  const auto violations = validate_scenario(*sc);
  for (const auto& v : violations) out << v << '\n';
  if (violations.empty()) {
    out << "ok\n";
    return kExitOk;
  }
  return kExitViolations;
}

int cmd_replay(const std::string& dir, std::ostream& out, std::ostream& err) {
  RecordedRun recorded;
  try {
    recorded = read_recorded_run(dir);
  } catch (const std::exception& e) {
    report_error(err, "parse", e.what());
    return kExitInvalid;
  }
  const auto report = replay(recorded);
  for (const auto& d : report.divergences) out << d << '\n';
  out << report.count() << " divergences\n";
  return report.count() == 0 ? kExitOk : kExitViolations;
}

const PortCheck& ModeReport::port(int id) const {
  for (const auto& p : ports) {
    if (p.port == id) return p;
  }
  throw std::out_of_range("no port " + std::to_string(id) + " in report");
}

ModeReport replicate_mode(char mode, double current_noise_a, std::uint64_t seed) {
  if (mode != 'A' && mode != 'B') throw std::invalid_argument("mode must be A or B");
  const Scenario sc = mode_ab_scenario();
  const SimulationResult result = run(sc);
  if (!result.complete()) throw std::runtime_error(*result.runtime_error);

  ModeReport report;
  report.mode = mode;
  report.step = mode == 'A' ? 0 : 1;
  const StepRecord& step = result.steps.at(static_cast<std::size_t>(report.step));
  report.switch_states = format_states(step.plan.switch_states);
  report.pass = true;

  for (int port = 1; port <= 3; ++port) {
    const PortFlow* pf = step.flows.flow(port);
    const double flow = pf ? pf->power_w : 0.0;
    SynthParams sp;
    sp.v_rms = kExperimentVrms;
    sp.freq_hz = kExperimentFreqHz;
    sp.i_rms = std::abs(flow) / kExperimentVrms;
    sp.phase_rad = flow < 0.0 ? std::numbers::pi : 0.0;
    sp.port_id = port;
    sp.current_noise_a = current_noise_a;
    sp.noise_seed = seed + static_cast<std::uint64_t>(port);
    WaveformFrame frame = synth(sp);

    const Expectation want = expected_for(mode, port);
    PortCheck c;
    c.port = port;
    c.expected_w = want.power_w;
    c.expected_phase = want.phase;
    c.scheduled_w = flow;
    c.average_power_w = average_power(frame);
    c.i_rms_a = rms_current(frame);
    c.phase = phase_relation(frame);
    const double tol = want.power_w == 0.0 ? kIdleToleranceW : kRelTolerance * std::abs(want.power_w);
    c.pass = std::abs(c.average_power_w - want.power_w) <= tol && c.phase == want.phase;
    report.pass = report.pass && c.pass;
    report.ports.push_back(c);
    report.frames.push_back(std::move(frame));
  }
  return report;
}

int cmd_replicate_experiment(const ExperimentOptions& opts, std::ostream& out, std::ostream& err) {
  std::vector<char> modes;
  if (opts.mode == "A" || opts.mode == "B") {
    modes.push_back(opts.mode[0]);
  } else if (opts.mode == "AB") {
    modes = {'A', 'B'};
  } else {
    report_error(err, "usage", "mode must be A, B or AB");
    return kExitInvalid;
  }

  std::vector<ModeReport> reports;
  for (char m : modes) reports.push_back(replicate_mode(m, opts.current_noise_a, opts.seed));

  json doc{{"v_rms", kExperimentVrms},
           {"freq_hz", kExperimentFreqHz},
           {"current_noise_a", opts.current_noise_a},
           {"modes", json::array()}};
  bool pass = true;
  for (const auto& r : reports) {
    doc["modes"].push_back(mode_json(r));
    pass = pass && r.pass;
  }
  if (reports.size() == 2) {
    const bool reversal = reports[0].port(3).average_power_w > 0.0 && reports[1].port(3).average_power_w < 0.0;
    doc["port3_sign_reversal"] = reversal;
    pass = pass && reversal;
  }
  doc["pass"] = pass;

  try {
    fs::create_directories(opts.out_dir);
    for (const auto& r : reports) {
      for (const auto& f : r.frames) {
        const auto name = "mode" + std::string(1, r.mode) + "_port" + std::to_string(f.port_id) + ".csv";
        std::ofstream csv(fs::path(opts.out_dir) / name, std::ios::binary | std::ios::trunc);
        write_csv(csv, f);
        if (!csv) throw std::runtime_error("cannot write " + name);
      }
    }
    std::ofstream rep(fs::path(opts.out_dir) / "report.json", std::ios::binary | std::ios::trunc);
    rep << doc.dump(2) << '\n';
    if (!rep) throw std::runtime_error("cannot write report.json");
  } catch (const std::exception& e) {
    report_error(err, "io", e.what());
    return kExitViolations;
  }

  for (const auto& r : reports) {
    out << "mode " << r.mode << " switches " << r.switch_states << (r.pass ? " PASS" : " FAIL") << '\n';
    for (const auto& p : r.ports) {
      out << "  port " << p.port << ' ' << format_number(p.average_power_w) << " W " << to_string(p.phase) << '\n';
    }
  }
  return pass ? kExitOk : kExitViolations;
}

}  // namespace gridroute::cli
