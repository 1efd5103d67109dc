#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gridroute/grid_model.hpp"
#include "gridroute/ledger.hpp"
#include "gridroute/power_flow.hpp"
#include "gridroute/scheduler.hpp"
#include "gridroute/switch_matrix.hpp"

namespace gridroute {

/// A per-step value: either one constant or an explicit series.
struct Series {
  std::vector<double> values;
  bool constant = true;

  static Series of(double v) { return {{v}, true}; }
  static Series of(std::vector<double> v) { return {std::move(v), false}; }
  double at(int step) const;
};

struct HouseScenario {
  HouseProfile profile;
  Series generation_w = Series::of(0.0);
  Series demand_w = Series::of(0.0);
  /// Uniform jitter amplitude (W) applied to generation and demand from the scenario RNG.
  double jitter_w = 0.0;
};

struct PriorityEntry {
  int port = 0;
  int rank = 1;
  std::optional<double> demand_w;  // default: the house's deficit that step
};

struct Scenario {
  std::string name = "scenario";
  MatrixLayout layout = MatrixLayout::prototype4();
  std::vector<HouseScenario> houses;
  CommunityAssets assets;
  std::vector<PriorityEntry> priorities;
  Series price_per_kwh = Series::of(0.0);
  std::uint64_t seed = 0;
  double step_duration_s = 60.0;
  int steps = 1;
  std::set<int> emergency_steps;
  bool renewable_only_p2g = false;
  bool fc_inherits_renewable = true;
  std::map<int, std::vector<std::pair<int, int>>> manual_routes;

  double step_duration_h() const { return step_duration_s / 3600.0; }
  std::vector<HouseProfile> profiles() const;
};

/// Every problem that would make run() refuse the scenario.
std::vector<std::string> validate_scenario(const Scenario& scenario);

class ScenarioInvalid : public std::runtime_error {
 public:
  explicit ScenarioInvalid(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

struct StepRecord {
  int step_index = 0;
  std::vector<NetInjection> injections;
  DispatchPlan plan;
  StepFlows flows;
  std::vector<StateViolation> violations;
  double price_per_kwh = 0.0;
  double battery_soc = 0.0;
  double hydrogen_kg = 0.0;
  double hydrogen_renewable_kg = 0.0;
  /// Sum of house-side flows minus the community storage net; zero when lossless.
  double balance_residual_w = 0.0;
};

struct SimulationResult {
  std::string scenario_name;
  std::string layout_name;
  double step_duration_h = 0.0;
  std::uint64_t seed = 0;
  int requested_steps = 0;
  std::vector<int> accounts;
  HydrogenParams hydrogen_params;
  HydrogenStore initial_hydrogen;
  std::vector<StepRecord> steps;
  LedgerState ledger;
  /// Set when a step could not be executed; steps holds everything before it.
  std::optional<std::string> runtime_error;

  bool complete() const { return !runtime_error.has_value(); }
};

/// Executes steps (default: scenario.steps) sequentially, carrying battery
/// and hydrogen state. Throws ScenarioInvalid before step 0 when
/// validate_scenario reports anything.
SimulationResult run(const Scenario& scenario, std::optional<int> steps = std::nullopt);

/// Everything needed to re-derive a ledger from recorded physics.
struct RecordedStep {
  DispatchPlan plan;
  std::vector<PortFlow> flows;
  double price_per_kwh = 0.0;
};

struct RecordedRun {
  double step_duration_h = 0.0;
  HydrogenParams hydrogen_params;
  HydrogenStore initial_hydrogen;
  std::vector<int> accounts;
  std::vector<RecordedStep> steps;
  std::vector<TradeRecord> trades;
  std::vector<HydrogenBatch> batches;
  std::vector<HydrogenDraw> draws;
  std::optional<std::map<int, AccountBalance>> balances;
};

RecordedRun record_of(const SimulationResult& result);

struct ReplayReport {
  std::vector<std::string> divergences;
  std::size_t count() const { return divergences.size(); }
};

/// Re-derives the ledger from recorded plans and flows and lists every record
/// that disagrees with it.
ReplayReport replay(const RecordedRun& run);

/// Built-in three-house scenario: step 0 routes house 3 to house 2 (mode A),
/// step 1 routes house 1 to house 3 (mode B), 500 W each.
Scenario mode_ab_scenario();

/// Random community on a given layout; used for property and determinism checks.
Scenario random_scenario(std::uint64_t seed, int steps, const MatrixLayout& layout = MatrixLayout::full4x2());

/// Deterministic uniform [0, 1) from a 64-bit engine output.
double unit_uniform(std::uint64_t bits);

}  // namespace gridroute
