#pragma once

#include <map>
#include <optional>
#include <vector>

#include "gridroute/grid_model.hpp"
#include "gridroute/switch_matrix.hpp"

namespace gridroute {

/// Residual below which a group counts as balanced.
inline constexpr double kBalanceTolerance = 1e-9;

struct PortFlow {
  int port_id = 0;
  double power_w = 0.0;  // positive = inflow to router
  bool served = true;
};

/// Operating range of a port that may absorb a group's imbalance.
struct SlackLimits {
  double min_w = 0.0;
  double max_w = 0.0;
};

struct GroupBalanceReport {
  std::vector<int> group;
  double residual_w = 0.0;
  std::optional<int> slack_port;
  bool feasible = true;
};

struct StepFlows {
  std::vector<PortFlow> flows;  // one per port, ascending port id
  std::vector<GroupBalanceReport> groups;

  bool all_feasible() const;
  const PortFlow* flow(int port) const;
};

/// Lossless per-group balance. Fixed injections are taken as given; slack
/// ports (ascending id) replace their own injection to absorb the group
/// residual within their limits. A group whose residual cannot be absorbed
/// is de-energized as a whole and reported infeasible.
/// Throws std::invalid_argument when a port lacks an injection or has two.
StepFlows solve_step(const ConnectivityGraph& graph, const std::vector<NetInjection>& injections,
                     const std::map<int, SlackLimits>& slacks = {});

}  // namespace gridroute
