#include "gridroute/scheduler.hpp"

#include <algorithm>
#include <charconv>
#include <stdexcept>

#include "gridroute/disjoint_set.hpp"

namespace gridroute {

namespace {

constexpr double kEps = 1e-9;

struct Amount {
  int port;
  double power_w;
  double share;
};

// Descending power, ties by ascending port.
void sort_desc(std::vector<Amount>& v) {
  std::sort(v.begin(), v.end(), [](const Amount& a, const Amount& b) {
    if (a.power_w != b.power_w) return a.power_w > b.power_w;
    return a.port < b.port;
  });
}

std::vector<std::vector<int>> groups_of(const std::vector<Pairing>& pairings, int n_ports) {
  DisjointSet ds(static_cast<std::size_t>(n_ports + 1));
  std::vector<bool> used(static_cast<std::size_t>(n_ports + 1), false);
  for (const auto& p : pairings) {
    ds.unite(static_cast<std::size_t>(p.source_port), static_cast<std::size_t>(p.sink_port));
    used[static_cast<std::size_t>(p.source_port)] = true;
    used[static_cast<std::size_t>(p.sink_port)] = true;
  }
  std::map<std::size_t, std::vector<int>> by_root;
  for (int p = 1; p <= n_ports; ++p) {
    if (used[static_cast<std::size_t>(p)]) by_root[ds.find(static_cast<std::size_t>(p))].push_back(p);
  }
  std::vector<std::vector<int>> out;
  for (auto& [r, g] : by_root) out.push_back(std::move(g));
  return out;
}

std::optional<SwitchStateVector> realize(const MatrixLayout& layout, const std::vector<Pairing>& pairings) {
  return states_for_groups(layout, groups_of(pairings, layout.n_ports()));
}

void check_port(const MatrixLayout& layout, int port) {
  if (!layout.has_port(port)) {
    throw std::invalid_argument("port " + std::to_string(port) + " is not on layout " + layout.name());
  }
}

// In each energized group the port exporting the most forms the voltage;
// a group without any export is formed by its lowest port.
std::map<int, PortRole> assign_roles(const MatrixLayout& layout, const SwitchStateVector& states,
                                     const std::vector<Pairing>& pairings) {
  std::map<int, double> exported;
  for (const auto& p : pairings) exported[p.source_port] += p.power_w;
  std::map<int, PortRole> roles;
  for (int p = 1; p <= layout.n_ports(); ++p) roles[p] = PortRole::Idle;
  for (const auto& group : connectivity(layout, states).energized()) {
    int former = group.front();
    double best = 0.0;
    for (int p : group) {
      const double e = exported.count(p) ? exported[p] : 0.0;
      if (e > best) {
        best = e;
        former = p;
      }
    }
    for (int p : group) roles[p] = p == former ? PortRole::Forming : PortRole::Following;
  }
  return roles;
}

std::string pairing_text(const Pairing& p) {
  return std::to_string(p.source_port) + "→" + std::to_string(p.sink_port) + " @" + format_watts(p.power_w) + "W";
}

void finish_normal(DispatchPlan& plan, const MatrixLayout& layout, std::map<int, double>& rem_s,
                   std::map<int, double>& rem_d) {
  for (const auto& [port, w] : rem_d) {
    if (w > kEps) plan.grid_import.push_back({port, w});
  }
  for (const auto& [port, w] : rem_s) {
    if (w > kEps) plan.spill.push_back({port, w});
  }
  auto states = realize(layout, plan.pairings);
  // Callers only commit pairings that realize, so this always succeeds.
  plan.switch_states = states ? *states : SwitchStateVector::all_open(layout);
  plan.roles = assign_roles(layout, plan.switch_states, plan.pairings);
}

}  // namespace

std::string to_string(PlanMode mode) { return mode == PlanMode::Normal ? "normal" : "emergency"; }

std::map<int, double> DispatchPlan::port_injections() const {
  std::map<int, double> out;
  for (const auto& p : pairings) {
    out[p.source_port] += p.power_w;
    out[p.sink_port] -= p.power_w;
  }
  return out;
}

std::string format_watts(double w) {
  if (w == 0.0) w = 0.0;  // drop the sign of -0
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, w);
  return std::string(buf, res.ptr);
}

double battery_charge_headroom_w(const BatteryAsset& b, double dt_h) {
  if (b.capacity_wh <= 0.0 || dt_h <= 0.0) return 0.0;
  const double room_wh = std::max(0.0, (b.soc_max - b.soc) * b.capacity_wh);
  return std::max(0.0, std::min(b.max_charge_w, room_wh / (dt_h * b.charge_efficiency)));
}

double battery_discharge_headroom_w(const BatteryAsset& b, double dt_h) {
  if (b.capacity_wh <= 0.0 || dt_h <= 0.0) return 0.0;
  const double avail_wh = std::max(0.0, (b.soc - b.soc_min) * b.capacity_wh);
  return std::max(0.0, std::min(b.max_discharge_w, avail_wh / dt_h));
}

double fuel_cell_headroom_w(const CommunityAssets& a, double dt_h) {
  if (dt_h <= 0.0) return 0.0;
  const double from_h2 = a.hydrogen.total_kg * a.electrolyzer.lhv_wh_per_kg * a.fuel_cell.efficiency / dt_h;
  return std::max(0.0, std::min(a.fuel_cell.max_output_w, from_h2));
}

DispatchPlan plan_normal(const std::vector<NetInjection>& injections, const CommunityAssets& assets,
                         const MatrixLayout& layout, const PlanContext& ctx) {
  DispatchPlan plan;
  plan.step_index = ctx.step_index;
  plan.mode = PlanMode::Normal;

  const int hub = assets.port_id;
  std::vector<Amount> surpluses;
  std::vector<Amount> deficits;
  for (const auto& inj : injections) {
    check_port(layout, inj.port_id);
    if (inj.port_id == hub) continue;
    if (inj.power_w > kEps) surpluses.push_back({inj.port_id, inj.power_w, inj.renewable_share});
    if (inj.power_w < -kEps) deficits.push_back({inj.port_id, -inj.power_w, 0.0});
  }
  sort_desc(surpluses);
  sort_desc(deficits);

  // Two-pointer largest-to-largest matching.
  std::vector<Pairing> matched;
  {
    std::vector<double> rs, rd;
    for (const auto& s : surpluses) rs.push_back(s.power_w);
    for (const auto& d : deficits) rd.push_back(d.power_w);
    std::size_t i = 0, j = 0;
    while (i < rs.size() && j < rd.size()) {
      const double amt = std::min(rs[i], rd[j]);
      matched.push_back({surpluses[i].port, deficits[j].port, amt, surpluses[i].share});
      rs[i] -= amt;
      rd[j] -= amt;
      if (rs[i] <= kEps) ++i;
      if (rd[j] <= kEps) ++j;
    }
  }

  // Degrade until the grouping is realizable.
  while (!realize(layout, matched)) {
    std::size_t victim = 0;
    for (std::size_t k = 1; k < matched.size(); ++k) {
      if (matched[k].power_w <= matched[victim].power_w) victim = k;
    }
    plan.dropped.push_back(pairing_text(matched[victim]));
    matched.erase(matched.begin() + static_cast<std::ptrdiff_t>(victim));
  }
  plan.pairings = matched;

  std::map<int, double> rem_s, rem_d;
  std::map<int, double> share;
  for (const auto& s : surpluses) {
    rem_s[s.port] = s.power_w;
    share[s.port] = s.share;
  }
  for (const auto& d : deficits) rem_d[d.port] = d.power_w;
  for (const auto& p : plan.pairings) {
    rem_s[p.source_port] -= p.power_w;
    rem_d[p.sink_port] -= p.power_w;
  }

  const bool hub_on_router = hub != 0 && layout.has_port(hub);
  if (!hub_on_router) {
    finish_normal(plan, layout, rem_s, rem_d);
    return plan;
  }

  auto try_commit = [&](const Pairing& p) {
    std::vector<Pairing> trial = plan.pairings;
    trial.push_back(p);
    if (!realize(layout, trial)) return false;
    plan.pairings = std::move(trial);
    return true;
  };

  // Surplus: battery first, then P2G.
  double charge_left = battery_charge_headroom_w(assets.battery, ctx.step_duration_h);
  double p2g_left = assets.electrolyzer.max_input_w;
  std::vector<Amount> left_s;
  for (const auto& [port, w] : rem_s) {
    if (w > kEps) left_s.push_back({port, w, share[port]});
  }
  sort_desc(left_s);
  double charged = 0.0;
  for (const auto& s : left_s) {
    if (charge_left + p2g_left <= kEps) break;
    const double bat = std::min(s.power_w, charge_left);
    const bool p2g_ok = !ctx.renewable_only_p2g || s.share >= 1.0;
    const double p2g = p2g_ok ? std::min(s.power_w - bat, p2g_left) : 0.0;
    if (bat + p2g <= kEps) continue;
    if (!try_commit({s.port, hub, bat + p2g, s.share})) continue;
    charge_left -= bat;
    p2g_left -= p2g;
    charged += bat;
    plan.p2g_input_w += p2g;
    plan.storage_inputs.push_back({s.port, bat, p2g, s.share});
    rem_s[s.port] -= bat + p2g;
  }

  // Deficit: battery, then fuel cell; only when the hub is not absorbing.
  double discharged = 0.0;
  if (plan.storage_inputs.empty()) {
    double bat_left = battery_discharge_headroom_w(assets.battery, ctx.step_duration_h);
    double fc_left = fuel_cell_headroom_w(assets, ctx.step_duration_h);
    double h2_share = 0.0;
    if (ctx.fc_inherits_renewable && assets.hydrogen.total_kg > 0.0) {
      h2_share = std::clamp(assets.hydrogen.renewable_kg / assets.hydrogen.total_kg, 0.0, 1.0);
    }
    std::vector<Amount> left_d;
    for (const auto& [port, w] : rem_d) {
      if (w > kEps) left_d.push_back({port, w, 0.0});
    }
    sort_desc(left_d);
    for (const auto& d : left_d) {
      if (bat_left + fc_left <= kEps) break;
      const double bat = std::min(d.power_w, bat_left);
      const double fc = std::min(d.power_w - bat, fc_left);
      const double total = bat + fc;
      if (total <= kEps) continue;
      const double s = (bat * assets.battery.renewable_fraction + fc * h2_share) / total;
      if (!try_commit({hub, d.port, total, s})) continue;
      bat_left -= bat;
      fc_left -= fc;
      discharged += bat;
      plan.fc_output_w += fc;
      rem_d[d.port] -= total;
    }
  }
  plan.battery_command_w = charged - discharged;

  finish_normal(plan, layout, rem_s, rem_d);
  return plan;
}

std::optional<DispatchPlan> plan_manual(const std::vector<NetInjection>& injections,
                                        const std::vector<std::pair<int, int>>& pairs,
                                        const MatrixLayout& layout, const PlanContext& ctx) {
  for (const auto& [a, b] : pairs) {
    check_port(layout, a);
    check_port(layout, b);
  }
  auto states = states_for_pairs(layout, pairs);
  if (!states) return std::nullopt;

  std::map<int, NetInjection> by_port;
  for (const auto& inj : injections) by_port[inj.port_id] = inj;
  auto power = [&](int p) { return by_port.count(p) ? by_port[p].power_w : 0.0; };

  DispatchPlan plan;
  plan.step_index = ctx.step_index;
  std::map<int, double> rem_s, rem_d;
  for (const auto& inj : injections) {
    if (inj.power_w > kEps) rem_s[inj.port_id] = inj.power_w;
    if (inj.power_w < -kEps) rem_d[inj.port_id] = -inj.power_w;
  }
  for (const auto& [a, b] : pairs) {
    int src = a, dst = b;
    if (!(power(src) > kEps && power(dst) < -kEps)) std::swap(src, dst);
    if (!(power(src) > kEps && power(dst) < -kEps)) continue;
    const double amt = std::min(power(src), -power(dst));
    plan.pairings.push_back({src, dst, amt, by_port[src].renewable_share});
    rem_s[src] -= amt;
    rem_d[dst] -= amt;
  }
  for (const auto& [port, w] : rem_d) {
    if (w > kEps) plan.grid_import.push_back({port, w});
  }
  for (const auto& [port, w] : rem_s) {
    if (w > kEps) plan.spill.push_back({port, w});
  }
  plan.switch_states = *states;
  plan.roles = assign_roles(layout, plan.switch_states, plan.pairings);
  return plan;
}

std::vector<PriorityClass> sorted_by_priority(std::vector<PriorityClass> loads) {
  std::stable_sort(loads.begin(), loads.end(), [](const PriorityClass& a, const PriorityClass& b) {
    if (a.rank != b.rank) return a.rank < b.rank;
    return a.load_port < b.load_port;
  });
  return loads;
}

DispatchPlan plan_emergency(const EmergencySupply& supply, const std::vector<PriorityClass>& priorities,
                            const MatrixLayout& layout, int step_index) {
  if (!(supply.available_w >= 0.0)) throw std::invalid_argument("available supply must be nonnegative");
  check_port(layout, supply.supply_port);
  for (const auto& p : priorities) {
    check_port(layout, p.load_port);
    if (p.rank < 1) throw std::invalid_argument("priority ranks must be positive");
    if (!(p.demand_w >= 0.0)) throw std::invalid_argument("load demand must be nonnegative");
    if (p.load_port == supply.supply_port) throw std::invalid_argument("a load cannot sit on the supply port");
  }

  DispatchPlan plan;
  plan.step_index = step_index;
  plan.mode = PlanMode::Emergency;

  const auto loads = sorted_by_priority(priorities);
  for (std::size_t i = 0; i < loads.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (loads[i].load_port == loads[j].load_port) {
        throw std::invalid_argument("load port " + std::to_string(loads[i].load_port) + " listed twice");
      }
    }
  }
  // Longest prefix that fits the supply and that the layout can join to the
  // supply port. Supply fit is monotone in the prefix length, reach is not.
  std::size_t fits = 0;
  double running = 0.0;
  while (fits < loads.size() && running + loads[fits].demand_w <= supply.available_w) {
    running += loads[fits].demand_w;
    ++fits;
  }
  std::size_t next = 0;
  std::vector<int> group{supply.supply_port};
  for (std::size_t k = fits; k > 0; --k) {
    std::vector<int> trial{supply.supply_port};
    for (std::size_t i = 0; i < k; ++i) trial.push_back(loads[i].load_port);
    if (states_for_groups(layout, {trial})) {
      next = k;
      group = std::move(trial);
      break;
    }
  }
  double committed = 0.0;
  for (std::size_t i = 0; i < next; ++i) {
    committed += loads[i].demand_w;
    plan.served_ports.push_back(loads[i].load_port);
  }
  for (std::size_t k = next; k < loads.size(); ++k) plan.blocked_ports.push_back(loads[k].load_port);
  std::sort(plan.blocked_ports.begin(), plan.blocked_ports.end());

  // Draw battery first, then fuel cell, then other supply.
  const double bat = std::min(committed, supply.battery_w);
  const double fc = std::min(committed - bat, supply.fc_w);
  const double other = committed - bat - fc;
  const double share =
      committed > 0.0 ? (bat * supply.battery_share + fc * supply.fc_share + other * supply.other_share) / committed
                      : 0.0;
  for (std::size_t k = 0; k < plan.served_ports.size(); ++k) {
    if (loads[k].demand_w > 0.0) {
      plan.pairings.push_back({supply.supply_port, loads[k].load_port, loads[k].demand_w, share});
    }
  }
  plan.battery_command_w = -bat;
  plan.fc_output_w = fc;

  auto states = group.size() >= 2 ? states_for_groups(layout, {group}) : std::nullopt;
  plan.switch_states = states ? *states : SwitchStateVector::all_open(layout);
  plan.roles = assign_roles(layout, plan.switch_states, plan.pairings);
  std::sort(plan.served_ports.begin(), plan.served_ports.end());
  return plan;
}

std::string explain_plan(const DispatchPlan& plan) {
  std::string out = "step " + std::to_string(plan.step_index) + " mode " + to_string(plan.mode) + "\n";
  const std::size_t header = out.size();
  for (const auto& p : plan.pairings) {
    out += "pairing " + pairing_text(p) + " renewable " + format_watts(p.renewable_share) + "\n";
  }
  for (const auto& d : plan.dropped) out += "dropped pairing " + d + " (layout infeasible)\n";
  if (plan.battery_command_w > 0.0) out += "battery charge " + format_watts(plan.battery_command_w) + "W\n";
  if (plan.battery_command_w < 0.0) {
    out += "battery discharge " + format_watts(-plan.battery_command_w) + "W\n";
  }
  if (plan.p2g_input_w > 0.0) out += "p2g input " + format_watts(plan.p2g_input_w) + "W\n";
  if (plan.fc_output_w > 0.0) out += "fuel cell output " + format_watts(plan.fc_output_w) + "W\n";
  for (const auto& g : plan.grid_import) {
    out += "grid import port " + std::to_string(g.port_id) + " @" + format_watts(g.power_w) + "W\n";
  }
  for (const auto& s : plan.spill) {
    out += "spill port " + std::to_string(s.port_id) + " @" + format_watts(s.power_w) + "W\n";
  }
  if (plan.mode == PlanMode::Emergency) {
    auto list = [](const std::vector<int>& ports) {
      std::string s;
      for (std::size_t i = 0; i < ports.size(); ++i) s += (i ? ", " : "") + std::to_string(ports[i]);
      return s.empty() ? std::string("none") : s;
    };
    out += "served ports: " + list(plan.served_ports) + "\n";
    out += "blocked ports: " + list(plan.blocked_ports) + "\n";
  }
  if (out.size() == header) return out + "no action\n";
  out += "switches " + format_states(plan.switch_states) + "\n";
  return out;
}

}  // namespace gridroute
