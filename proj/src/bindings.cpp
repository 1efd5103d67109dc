#include <optional>
#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gridroute/cli_runner.hpp"
#include "gridroute/scenario_io.hpp"

namespace py = pybind11;
using namespace gridroute;

namespace {

Scenario scenario_arg(const std::string& path_or_text) {
  const auto first = path_or_text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && path_or_text[first] == '{') return parse_scenario(path_or_text);
  return load_scenario(path_or_text);
}

std::string simulate(const std::string& scenario, std::optional<int> steps, std::optional<std::string> out_dir) {
  const auto sc = scenario_arg(scenario);
  const auto result = run(sc, steps);
  if (out_dir) write_outputs(*out_dir, result, sc.layout);
  return summary_json(result).dump();
}

std::string flows_csv(const std::string& scenario, std::optional<int> steps) {
  std::ostringstream os;
  write_flows_csv(os, run(scenario_arg(scenario), steps));
  return os.str();
}

py::dict mode_report(char mode, double noise, std::uint64_t seed) {
  const auto r = cli::replicate_mode(mode, noise, seed);
  py::dict d;
  d["mode"] = std::string(1, r.mode);
  d["switch_states"] = r.switch_states;
  d["pass"] = r.pass;
  py::dict ports;
  for (const auto& p : r.ports) {
    py::dict e;
    e["expected_w"] = p.expected_w;
    e["average_power_w"] = p.average_power_w;
    e["i_rms_a"] = p.i_rms_a;
    e["phase"] = to_string(p.phase);
    e["pass"] = p.pass;
    ports[py::int_(p.port)] = e;
  }
  d["ports"] = ports;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Line-switching power router community simulator";

  py::register_exception<ScenarioParseError>(m, "ScenarioParseError", PyExc_ValueError);
  py::register_exception<ScenarioInvalid>(m, "ScenarioInvalid", PyExc_ValueError);

  m.def("simulate", &simulate, py::arg("scenario"), py::arg("steps") = py::none(), py::arg("out_dir") = py::none(),
        "Run a scenario (path, builtin name or JSON text); returns the summary as JSON text.");
  m.def("flows_csv", &flows_csv, py::arg("scenario"), py::arg("steps") = py::none());
  m.def("validate", [](const std::string& s) { return validate_scenario(scenario_arg(s)); }, py::arg("scenario"));
  m.def("replay_dir", [](const std::string& dir) { return replay(read_recorded_run(dir)).divergences; },
        py::arg("dir"));
  m.def("replicate_mode", &mode_report, py::arg("mode"), py::arg("current_noise_a") = 0.0, py::arg("seed") = 0);

  m.def(
      "states_for_pairs",
      [](const std::string& layout, const std::vector<std::pair<int, int>>& pairs) -> std::optional<std::string> {
        auto s = states_for_pairs(MatrixLayout::named(layout), pairs);
        if (!s) return std::nullopt;
        return format_states(*s);
      },
      py::arg("layout"), py::arg("pairs"));
  m.def(
      "connectivity",
      [](const std::string& layout, const std::vector<bool>& closed) {
        return connectivity(MatrixLayout::named(layout), SwitchStateVector{closed}).groups;
      },
      py::arg("layout"), py::arg("closed"));

  m.def(
      "average_power",
      [](double v_rms, double freq_hz, double i_rms, double phase_rad, double duration_s, double sample_rate_hz) {
        return average_power(synth(v_rms, freq_hz, i_rms, phase_rad, duration_s, sample_rate_hz));
      },
      py::arg("v_rms"), py::arg("freq_hz"), py::arg("i_rms"), py::arg("phase_rad"), py::arg("duration_s") = 0.1,
      py::arg("sample_rate_hz") = 12000.0);
  m.def(
      "hydrogen_mass_kg",
      [](double energy_wh, double efficiency, double lhv) {
        HydrogenParams p;
        p.p2g_efficiency = efficiency;
        p.lhv_wh_per_kg = lhv;
        return hydrogen_mass_kg(energy_wh, p);
      },
      py::arg("energy_wh"), py::arg("efficiency") = 0.7, py::arg("lhv_wh_per_kg") = 33330.0);
}
