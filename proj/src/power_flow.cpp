#include "gridroute/power_flow.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gridroute {

bool StepFlows::all_feasible() const {
  return std::all_of(groups.begin(), groups.end(), [](const auto& g) { return g.feasible; });
}

const PortFlow* StepFlows::flow(int port) const {
  auto it = std::lower_bound(flows.begin(), flows.end(), port,
                             [](const PortFlow& f, int p) { return f.port_id < p; });
  if (it == flows.end() || it->port_id != port) return nullptr;
  return &*it;
}

StepFlows solve_step(const ConnectivityGraph& graph, const std::vector<NetInjection>& injections,
                     const std::map<int, SlackLimits>& slacks) {
  std::map<int, double> injected;
  for (const auto& inj : injections) {
    if (!injected.emplace(inj.port_id, inj.power_w).second) {
      throw std::invalid_argument("port " + std::to_string(inj.port_id) + " has more than one injection");
    }
  }
  std::size_t covered = 0;
  for (const auto& g : graph.groups) {
    for (int p : g) {
      if (injected.find(p) == injected.end()) {
        throw std::invalid_argument("port " + std::to_string(p) + " has no injection");
      }
      ++covered;
    }
  }
  if (covered != injected.size()) throw std::invalid_argument("injection for a port outside the graph");

  StepFlows out;
  out.flows.reserve(covered);
  for (const auto& group : graph.groups) {
    GroupBalanceReport report;
    report.group = group;

    std::vector<int> slack_ports;
    double fixed_sum = 0.0;
    for (int p : group) {
      if (slacks.count(p)) {
        slack_ports.push_back(p);
      } else {
        fixed_sum += injected.at(p);
      }
    }

    std::map<int, double> result;
    for (int p : group) result[p] = slacks.count(p) ? 0.0 : injected.at(p);

    // Slacks take up -fixed_sum in ascending-port order, each clamped to its range.
    double need = -fixed_sum;
    for (int p : slack_ports) {
      const auto& lim = slacks.at(p);
      const double take = std::clamp(need, lim.min_w, lim.max_w);
      result[p] = take;
      need -= take;
    }
    double residual = 0.0;
    for (const auto& [p, w] : result) residual += w;

    if (!slack_ports.empty()) report.slack_port = slack_ports.front();
    report.feasible = std::abs(residual) <= kBalanceTolerance;
    report.residual_w = residual;

    for (int p : group) {
      PortFlow f;
      f.port_id = p;
      f.served = report.feasible;
      f.power_w = report.feasible ? result[p] : 0.0;
      out.flows.push_back(f);
    }
    out.groups.push_back(std::move(report));
  }
  std::sort(out.flows.begin(), out.flows.end(),
            [](const PortFlow& a, const PortFlow& b) { return a.port_id < b.port_id; });
  return out;
}

}  // namespace gridroute
