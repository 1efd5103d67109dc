#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gridroute/grid_model.hpp"
#include "gridroute/switch_matrix.hpp"

namespace gridroute {

enum class PlanMode { Normal, Emergency };

std::string to_string(PlanMode mode);

struct Pairing {
  int source_port = 0;
  int sink_port = 0;
  double power_w = 0.0;
  double renewable_share = 0.0;
  bool operator==(const Pairing&) const = default;
};

/// One source's contribution to community storage within a step.
struct StorageInput {
  int source_port = 0;
  double battery_w = 0.0;
  double p2g_w = 0.0;
  double renewable_share = 0.0;
  bool operator==(const StorageInput&) const = default;
};

/// Energy a house settles behind its own meter (grid import or spill).
struct PortAmount {
  int port_id = 0;
  double power_w = 0.0;
  bool operator==(const PortAmount&) const = default;
};

struct DispatchPlan {
  int step_index = 0;
  PlanMode mode = PlanMode::Normal;
  std::vector<Pairing> pairings;
  double battery_command_w = 0.0;  // positive = charge
  double p2g_input_w = 0.0;
  double fc_output_w = 0.0;
  std::vector<StorageInput> storage_inputs;
  std::vector<PortAmount> grid_import;  // deficits left to each house's own grid tie
  std::vector<PortAmount> spill;        // surplus not routed
  std::vector<int> served_ports;        // emergency mode
  std::vector<int> blocked_ports;       // emergency mode
  std::vector<std::string> dropped;     // pairings dropped as layout-infeasible
  SwitchStateVector switch_states;
  std::map<int, PortRole> roles;

  /// Net router-side injection at each port implied by the pairings.
  std::map<int, double> port_injections() const;
  double battery_charge_w() const { return battery_command_w > 0.0 ? battery_command_w : 0.0; }
  double battery_discharge_w() const { return battery_command_w < 0.0 ? -battery_command_w : 0.0; }
  bool operator==(const DispatchPlan&) const = default;
};

struct PlanContext {
  int step_index = 0;
  double step_duration_h = 60.0 / 3600.0;
  /// Send surplus to P2G only when its renewable share is exactly 1.
  bool renewable_only_p2g = false;
  /// Fuel-cell electricity carries the renewable fraction of the pooled hydrogen.
  bool fc_inherits_renewable = true;
};

/// Power the community battery can accept / deliver this step given its state.
double battery_charge_headroom_w(const BatteryAsset& battery, double step_duration_h);
double battery_discharge_headroom_w(const BatteryAsset& battery, double step_duration_h);
/// Fuel-cell output limited by rating and by the hydrogen inventory.
double fuel_cell_headroom_w(const CommunityAssets& assets, double step_duration_h);

/// Normal-mode routing: greedy largest-surplus to largest-deficit matching,
/// then surplus to community battery and P2G, then deficits from battery and
/// fuel cell; whatever remains is settled at each house's own meter. Switch
/// states are realized with states_for_groups; infeasible groupings degrade by
/// dropping the smallest pairing.
DispatchPlan plan_normal(const std::vector<NetInjection>& injections, const CommunityAssets& assets,
                         const MatrixLayout& layout, const PlanContext& ctx = {});

/// Route a fixed set of port pairs. Returns std::nullopt when the layout cannot
/// realize the pairing. Each pair transfers min(surplus, deficit) from the
/// exporting side to the importing side.
std::optional<DispatchPlan> plan_manual(const std::vector<NetInjection>& injections,
                                        const std::vector<std::pair<int, int>>& pairs,
                                        const MatrixLayout& layout, const PlanContext& ctx = {});

struct PriorityClass {
  int load_port = 0;
  int rank = 1;  // 1 = most critical
  double demand_w = 0.0;
};

/// Order used for service: ascending rank, then ascending port.
std::vector<PriorityClass> sorted_by_priority(std::vector<PriorityClass> loads);

/// Supply available to an islanded community. battery_w and fc_w are the
/// community-storage parts of available_w; service draws the battery first,
/// then the fuel cell, then any other source at the supply port.
struct EmergencySupply {
  int supply_port = 0;
  double available_w = 0.0;
  double battery_w = 0.0;
  double fc_w = 0.0;
  double battery_share = 0.0;
  double fc_share = 0.0;
  double other_share = 0.0;
};

/// Strict-prefix priority service: loads are served whole, in rank order.
/// The served set is the longest prefix whose total demand fits the supply
/// and which the layout can join to the supply port. Only the supply port
/// and served loads are connected.
/// Throws std::invalid_argument for negative supply or non-positive ranks.
DispatchPlan plan_emergency(const EmergencySupply& supply, const std::vector<PriorityClass>& priorities,
                            const MatrixLayout& layout, int step_index = 0);

/// Deterministic text trace of the rules a plan fired, one per line.
std::string explain_plan(const DispatchPlan& plan);

/// "500", "-500", "12.5": shortest round-trip formatting of watts.
std::string format_watts(double w);

}  // namespace gridroute
