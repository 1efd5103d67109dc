#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

#include "gridroute/cli_runner.hpp"
#include "gridroute/scenario_io.hpp"

using namespace gridroute;
namespace fs = std::filesystem;

namespace {

const fs::path kSource = GRIDROUTE_SOURCE_DIR;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("gridroute_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string flows_of(const SimulationResult& r) {
  std::ostringstream os;
  write_flows_csv(os, r);
  return os.str();
}

}  // namespace

TEST_CASE("shipped modeAB file matches the built-in scenario") {
  auto file = load_scenario((kSource / "scenarios/modeAB.json").string());
  CHECK(flows_of(run(file)) == flows_of(run(mode_ab_scenario())));
}

TEST_CASE("golden flows.csv for modeAB") {
  auto r = run(load_scenario((kSource / "scenarios/modeAB.json").string()));
  CHECK(flows_of(r) == slurp(kSource / "tests/golden/modeAB_flows.csv"));
}

TEST_CASE("parse errors") {
  CHECK_THROWS_AS(parse_scenario("{"), ScenarioParseError);
  CHECK_THROWS_AS(parse_scenario(slurp(kSource / "tests/data/missing_layout.json")), ScenarioParseError);
  CHECK_THROWS_AS(parse_scenario(slurp(kSource / "tests/data/unknown_key.json")), ScenarioParseError);
  CHECK_THROWS_AS(parse_scenario(R"({"layout":"prototype4","houses":[],"extra":1})"), ScenarioParseError);
  CHECK_THROWS_AS(parse_scenario(R"({"layout":"prototype4","houses":[],"assets":{"battery":{"volts":1}}})"),
                  ScenarioParseError);
  CHECK_THROWS_AS(parse_scenario(R"({"layout":"prototype4","houses":[{"id":"one","port":1}]})"),
                  ScenarioParseError);
  CHECK_THROWS_AS(parse_scenario(R"({"layout":"hexagon","houses":[]})"), ScenarioParseError);
  CHECK_THROWS_AS(load_scenario("/nonexistent/scenario.json"), ScenarioParseError);
}

TEST_CASE("explicit layouts") {
  auto sc = parse_scenario(R"({
    "layout": {"name": "tri", "n_ports": 3, "n_buses": 1, "switches": [[1, "A"], [2, "A"]], "hardwires": [[3, "A"]]},
    "houses": []})");
  CHECK(sc.layout.name() == "tri");
  CHECK(sc.layout.switches().size() == 2);
  CHECK(sc.layout.hardwires().size() == 1);
}

TEST_CASE("validation-level problems parse but are reported") {
  auto dup = parse_scenario(slurp(kSource / "tests/data/duplicate_port.json"));
  auto v = validate_scenario(dup);
  REQUIRE(v.size() == 1);
  CHECK(v[0].find("port_duplicate") == 0);
  auto len = parse_scenario(slurp(kSource / "tests/data/series_mismatch.json"));
  auto lv = validate_scenario(len);
  REQUIRE(lv.size() == 1);
  CHECK(lv[0].find("series_length") == 0);
}

TEST_CASE("scenario json round trip preserves the run") {
  for (std::uint64_t seed : {3u, 4u, 5u}) {
    const auto sc = random_scenario(seed, 40);
    const auto back = scenario_from_json(scenario_to_json(sc));
    CHECK(flows_of(run(back)) == flows_of(run(sc)));
    CHECK(run(back).ledger == run(sc).ledger);
  }
}

TEST_CASE("outputs read back replay clean; a tampered ledger line is found") {
  const auto dir = scratch("replay");
  const auto sc = random_scenario(11, 120);
  const auto r = run(sc);
  write_outputs(dir, r, sc.layout);
  CHECK(replay(read_recorded_run(dir)).count() == 0);

  const auto orig = read_recorded_run(dir);
  REQUIRE_FALSE(orig.trades.empty());
  CHECK(orig.trades == r.ledger.trades());
  CHECK(orig.batches == r.ledger.batches());
  CHECK(orig.draws == r.ledger.draws());

  // Perturb the first trade line by 1 Wh.
  std::string text = slurp(dir / "ledger.ndjson");
  std::istringstream in(text);
  std::ostringstream out;
  std::string line;
  bool done = false;
  while (std::getline(in, line)) {
    auto j = nlohmann::json::parse(line);
    if (!done && j["type"] == "trade") {
      j["energy_wh"] = j["energy_wh"].get<double>() + 1.0;
      done = true;
    }
    out << j.dump() << '\n';
  }
  std::ofstream(dir / "ledger.ndjson", std::ios::trunc) << out.str();
  CHECK(replay(read_recorded_run(dir)).count() == 1);
  fs::remove_all(dir);
}

TEST_CASE("outputs are byte-identical across runs") {
  const auto a = scratch("det_a");
  const auto b = scratch("det_b");
  const auto sc = random_scenario(99, 200);
  write_outputs(a, run(sc), sc.layout);
  write_outputs(b, run(sc), sc.layout);
  for (const char* f : {"flows.csv", "plans.ndjson", "ledger.ndjson", "summary.json"}) {
    CHECK(slurp(a / f) == slurp(b / f));
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("cli exit codes") {
  std::ostringstream out, err;
  const auto dir = scratch("cli");
  cli::SimulateOptions o;
  o.scenario = (kSource / "scenarios/modeAB.json").string();
  o.out_dir = (dir / "ab").string();
  CHECK(cli::cmd_simulate(o, out, err) == 0);
  CHECK(slurp(dir / "ab/flows.csv") == slurp(kSource / "tests/golden/modeAB_flows.csv"));
  CHECK(cli::cmd_replay(o.out_dir, out, err) == 0);

  o.scenario = (kSource / "tests/data/missing_layout.json").string();
  o.out_dir = (dir / "bad").string();
  err.str("");
  CHECK(cli::cmd_simulate(o, out, err) == 2);
  CHECK(nlohmann::json::parse(err.str())["error"] == "parse");

  o.scenario = (kSource / "scenarios/infeasible_route.json").string();
  o.out_dir = (dir / "inf").string();
  err.str("");
  CHECK(cli::cmd_simulate(o, out, err) == 3);
  const auto report = nlohmann::json::parse(err.str());
  CHECK(report["error"] == "infeasible");
  CHECK_FALSE(report["violations"].empty());
  const auto summary = nlohmann::json::parse(slurp(dir / "inf/summary.json"));
  CHECK(summary["partial"] == true);
  CHECK(summary["steps_completed"] == 1);

  CHECK(cli::cmd_validate((kSource / "scenarios/modeAB.json").string(), out, err) == 0);
  out.str("");
  CHECK(cli::cmd_validate((kSource / "tests/data/duplicate_port.json").string(), out, err) == 1);
  CHECK(out.str().find("port_duplicate") != std::string::npos);
  CHECK(cli::cmd_validate((kSource / "tests/data/series_mismatch.json").string(), out, err) == 1);
  CHECK(cli::cmd_validate((kSource / "tests/data/missing_layout.json").string(), out, err) == 2);

  cli::ExperimentOptions e;
  e.out_dir = (dir / "exp").string();
  CHECK(cli::cmd_replicate_experiment(e, out, err) == 0);
  for (const char* f : {"modeA_port1.csv", "modeA_port2.csv", "modeA_port3.csv", "modeB_port1.csv",
                        "modeB_port2.csv", "modeB_port3.csv", "report.json"}) {
    CHECK(fs::exists(dir / "exp" / f));
  }
  const auto rep = nlohmann::json::parse(slurp(dir / "exp/report.json"));
  CHECK(rep["pass"] == true);
  CHECK(rep["port3_sign_reversal"] == true);
  fs::remove_all(dir);
}

TEST_CASE("replicate_mode reports phases") {
  auto a = cli::replicate_mode('A');
  CHECK(a.pass);
  CHECK(a.port(3).phase == PhaseRelation::InPhase);
  CHECK(a.port(2).phase == PhaseRelation::AntiPhase);
  CHECK(a.port(1).phase == PhaseRelation::NoCurrent);
  auto b = cli::replicate_mode('B');
  CHECK(b.pass);
  CHECK(b.port(1).phase == PhaseRelation::InPhase);
  CHECK(b.port(3).phase == PhaseRelation::AntiPhase);
  CHECK(b.port(2).phase == PhaseRelation::NoCurrent);
  auto noisy = cli::replicate_mode('A', 0.002, 3);
  CHECK(noisy.pass);
  CHECK_THROWS_AS(cli::replicate_mode('C'), std::invalid_argument);
}
