#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "json.hpp"

#include "gridroute/sim_engine.hpp"

namespace gridroute {

/// Malformed scenario document: bad JSON, wrong types, missing or unknown keys.
class ScenarioParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Scenario scenario_from_json(const nlohmann::json& doc);
Scenario parse_scenario(const std::string& text);
/// Reads a scenario file, or a built-in scenario by name ("modeAB") when no
/// such file exists.
Scenario load_scenario(const std::string& path_or_builtin);
nlohmann::json scenario_to_json(const Scenario& scenario);

MatrixLayout layout_from_json(const nlohmann::json& j);

nlohmann::json to_json(const DispatchPlan& plan, const MatrixLayout& layout);
DispatchPlan plan_from_json(const nlohmann::json& j);

/// Run outputs. Formats:
///   flows.csv     step,port,power_w,served (served as 1/0), ascending step then port
///   plans.ndjson  one plan object per step
///   ledger.ndjson one record per line, "type" in {trade, h2_batch, h2_draw}, by step
///   summary.json  run metadata, balances, hydrogen inventory, settlement
void write_flows_csv(std::ostream& os, const SimulationResult& result);
void write_plans_ndjson(std::ostream& os, const SimulationResult& result, const MatrixLayout& layout);
void write_ledger_ndjson(std::ostream& os, const LedgerState& ledger);
nlohmann::json summary_json(const SimulationResult& result);

/// Writes all four files into dir (created when missing).
void write_outputs(const std::filesystem::path& dir, const SimulationResult& result, const MatrixLayout& layout);

/// Reads the four files back into a form replay() accepts.
/// Throws std::runtime_error on malformed content.
RecordedRun read_recorded_run(const std::filesystem::path& dir);

/// Shortest round-trip decimal text.
std::string format_number(double x);

}  // namespace gridroute
