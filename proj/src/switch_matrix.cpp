#include "gridroute/switch_matrix.hpp"

#include <algorithm>
#include <stdexcept>

#include "gridroute/disjoint_set.hpp"

namespace gridroute {

namespace {

// Node numbering for union-find: ports 1..n map to 0..n-1, buses follow.
std::size_t port_node(int port) { return static_cast<std::size_t>(port - 1); }
std::size_t bus_node(const MatrixLayout& layout, int bus) {
  return static_cast<std::size_t>(layout.n_ports() + bus);
}

ConnectivityGraph groups_from(const MatrixLayout& layout, DisjointSet& ds) {
  std::map<std::size_t, std::vector<int>> by_root;
  for (int p = 1; p <= layout.n_ports(); ++p) by_root[ds.find(port_node(p))].push_back(p);
  ConnectivityGraph g;
  g.groups.reserve(by_root.size());
  for (auto& [root, ports] : by_root) g.groups.push_back(std::move(ports));
  std::sort(g.groups.begin(), g.groups.end());
  return g;
}

DisjointSet baseline(const MatrixLayout& layout) {
  DisjointSet ds(static_cast<std::size_t>(layout.n_ports() + layout.n_buses()));
  for (const auto& h : layout.hardwires()) ds.unite(port_node(h.port), bus_node(layout, h.bus));
  return ds;
}

void check_attachments(const std::vector<Attachment>& list, int n_ports, int n_buses, const char* what) {
  for (const auto& a : list) {
    if (a.port < 1 || a.port > n_ports || a.bus < 0 || a.bus >= n_buses) {
      throw std::invalid_argument(std::string(what) + " attachment out of range: port " +
                                  std::to_string(a.port) + " bus " + std::to_string(a.bus));
    }
  }
}

}  // namespace

std::string bus_name(int bus) {
  if (bus >= 0 && bus < 26) return std::string(1, static_cast<char>('A' + bus));
  return "bus" + std::to_string(bus);
}

std::string switch_name(const Attachment& a) { return "SW" + std::to_string(a.port) + bus_name(a.bus); }

MatrixLayout::MatrixLayout(std::string name, int n_ports, int n_buses, std::vector<Attachment> switches,
                           std::vector<Attachment> hardwires)
    : name_(std::move(name)),
      n_ports_(n_ports),
      n_buses_(n_buses),
      switches_(std::move(switches)),
      hardwires_(std::move(hardwires)) {
  if (n_ports_ < 2) throw std::invalid_argument("layout needs at least 2 ports");
  if (n_buses_ < 1) throw std::invalid_argument("layout needs at least 1 bus");
  check_attachments(switches_, n_ports_, n_buses_, "switch");
  check_attachments(hardwires_, n_ports_, n_buses_, "hardwire");
  std::sort(switches_.begin(), switches_.end());
  std::sort(hardwires_.begin(), hardwires_.end());
  if (std::adjacent_find(switches_.begin(), switches_.end()) != switches_.end()) {
    throw std::invalid_argument("duplicate switch in layout");
  }
  if (std::adjacent_find(hardwires_.begin(), hardwires_.end()) != hardwires_.end()) {
    throw std::invalid_argument("duplicate hardwire in layout");
  }
  for (const auto& h : hardwires_) {
    if (std::binary_search(switches_.begin(), switches_.end(), h)) {
      throw std::invalid_argument("attachment " + switch_name(h) + " is both switched and hardwired");
    }
  }
}

MatrixLayout MatrixLayout::prototype4() {
  return MatrixLayout("prototype4", 4, 2, {{1, 0}, {1, 1}, {2, 0}, {2, 1}}, {{3, 0}, {4, 1}});
}

MatrixLayout MatrixLayout::full4x2() {
  std::vector<Attachment> sw;
  for (int p = 1; p <= 4; ++p) {
    for (int b = 0; b < 2; ++b) sw.push_back({p, b});
  }
  return MatrixLayout("full4x2", 4, 2, std::move(sw), {});
}

MatrixLayout MatrixLayout::star(int n_ports) {
  std::vector<Attachment> sw;
  for (int p = 1; p <= n_ports; ++p) sw.push_back({p, 0});
  return MatrixLayout("star" + std::to_string(n_ports), n_ports, 1, std::move(sw), {});
}

MatrixLayout MatrixLayout::named(const std::string& name) {
  if (name == "prototype4") return prototype4();
  if (name == "full4x2") return full4x2();
  if (name.rfind("star", 0) == 0 && name.size() > 4) {
    const int n = std::stoi(name.substr(4));
    return star(n);
  }
  throw std::invalid_argument("unknown layout '" + name + "'");
}

std::optional<std::size_t> MatrixLayout::switch_index(const Attachment& a) const {
  auto it = std::lower_bound(switches_.begin(), switches_.end(), a);
  if (it == switches_.end() || *it != a) return std::nullopt;
  return static_cast<std::size_t>(it - switches_.begin());
}

SwitchStateVector SwitchStateVector::all_open(const MatrixLayout& layout) {
  return SwitchStateVector{std::vector<bool>(layout.switches().size(), false)};
}

SwitchStateVector SwitchStateVector::from_mask(const MatrixLayout& layout, unsigned long long mask) {
  SwitchStateVector s = all_open(layout);
  for (std::size_t i = 0; i < s.closed.size(); ++i) s.closed[i] = ((mask >> i) & 1ULL) != 0;
  return s;
}

std::size_t SwitchStateVector::closed_count() const {
  return static_cast<std::size_t>(std::count(closed.begin(), closed.end(), true));
}

std::string format_states(const SwitchStateVector& states) {
  std::string out = "(";
  for (std::size_t i = 0; i < states.closed.size(); ++i) {
    if (i) out += ",";
    out += states.closed[i] ? "ON" : "OFF";
  }
  return out + ")";
}

const std::vector<int>* ConnectivityGraph::group_of(int port) const {
  for (const auto& g : groups) {
    if (std::find(g.begin(), g.end(), port) != g.end()) return &g;
  }
  return nullptr;
}

bool ConnectivityGraph::connected(int a, int b) const {
  const auto* g = group_of(a);
  return g != nullptr && std::find(g->begin(), g->end(), b) != g->end();
}

std::vector<std::vector<int>> ConnectivityGraph::energized() const {
  std::vector<std::vector<int>> out;
  for (const auto& g : groups) {
    if (g.size() >= 2) out.push_back(g);
  }
  return out;
}

std::string format_groups(const ConnectivityGraph& graph) {
  std::string out = "{";
  for (std::size_t i = 0; i < graph.groups.size(); ++i) {
    if (i) out += ",";
    out += "{";
    for (std::size_t j = 0; j < graph.groups[i].size(); ++j) {
      if (j) out += ",";
      out += std::to_string(graph.groups[i][j]);
    }
    out += "}";
  }
  return out + "}";
}

ConnectivityGraph connectivity(const MatrixLayout& layout, const SwitchStateVector& states) {
  if (!states.matches(layout)) {
    throw std::invalid_argument("state vector has " + std::to_string(states.size()) + " entries, layout " +
                                layout.name() + " has " + std::to_string(layout.switches().size()));
  }
  DisjointSet ds = baseline(layout);
  const auto& sw = layout.switches();
  for (std::size_t i = 0; i < sw.size(); ++i) {
    if (states.closed[i]) ds.unite(port_node(sw[i].port), bus_node(layout, sw[i].bus));
  }
  return groups_from(layout, ds);
}

std::string to_string(PortRole role) {
  switch (role) {
    case PortRole::Forming:
      return "forming";
    case PortRole::Following:
      return "following";
    case PortRole::Idle:
      return "idle";
  }
  return "idle";
}

std::vector<StateViolation> validate_states(const MatrixLayout& layout, const SwitchStateVector& states,
                                            const std::map<int, PortRole>& roles) {
  std::vector<StateViolation> out;
  if (!states.matches(layout)) {
    out.push_back({Severity::Error, "state_size", "state vector does not cover the layout's switches", {}});
    return out;
  }
  const ConnectivityGraph graph = connectivity(layout, states);
  for (const auto& group : graph.energized()) {
    std::vector<int> forming;
    for (int p : group) {
      auto it = roles.find(p);
      if (it != roles.end() && it->second == PortRole::Forming) forming.push_back(p);
    }
    if (forming.size() != 1) {
      std::string msg = "energized group " + format_groups(ConnectivityGraph{{group}}) + " has " +
                        std::to_string(forming.size()) + " voltage-forming ports";
      out.push_back({Severity::Error, "forming_count", std::move(msg), group});
    }
  }

  // Closed buses per port, hardwires included.
  std::map<int, std::set<int>> buses;
  for (const auto& h : layout.hardwires()) buses[h.port].insert(h.bus);
  const auto& sw = layout.switches();
  for (std::size_t i = 0; i < sw.size(); ++i) {
    if (states.closed[i]) buses[sw[i].port].insert(sw[i].bus);
  }
  for (const auto& [port, set] : buses) {
    if (set.size() < 2) continue;
    std::string msg = "port " + std::to_string(port) + " bridges buses";
    for (int b : set) msg += " " + bus_name(b);
    out.push_back({Severity::Warning, "bus_merge", std::move(msg), {port}});
  }
  return out;
}

bool has_errors(const std::vector<StateViolation>& violations) {
  return std::any_of(violations.begin(), violations.end(),
                     [](const auto& v) { return v.severity == Severity::Error; });
}

std::optional<SwitchStateVector> states_for_groups(const MatrixLayout& layout,
                                                   const std::vector<std::vector<int>>& groups) {
  std::vector<int> group_of(static_cast<std::size_t>(layout.n_ports() + 1), -1);
  ConnectivityGraph target;
  for (const auto& g : groups) {
    if (g.size() < 2) continue;
    const int id = static_cast<int>(target.groups.size());
    std::vector<int> sorted = g;
    std::sort(sorted.begin(), sorted.end());
    for (int p : sorted) {
      if (!layout.has_port(p)) throw std::invalid_argument("unknown port " + std::to_string(p));
      if (group_of[static_cast<std::size_t>(p)] != -1) {
        throw std::invalid_argument("port " + std::to_string(p) + " requested in more than one group");
      }
      group_of[static_cast<std::size_t>(p)] = id;
    }
    target.groups.push_back(std::move(sorted));
  }
  for (const auto& g : groups) {
    if (g.size() == 1 && !layout.has_port(g.front())) {
      throw std::invalid_argument("unknown port " + std::to_string(g.front()));
    }
  }
  for (int p = 1; p <= layout.n_ports(); ++p) {
    if (group_of[static_cast<std::size_t>(p)] == -1) target.groups.push_back({p});
  }
  std::sort(target.groups.begin(), target.groups.end());

  // A closed switch can only appear in a minimal solution when its port is in a
  // requested group and every port hardwired to its bus is in that group too.
  std::vector<std::vector<int>> hardwired_on_bus(static_cast<std::size_t>(layout.n_buses()));
  std::vector<bool> port_hardwired(static_cast<std::size_t>(layout.n_ports() + 1), false);
  for (const auto& h : layout.hardwires()) {
    hardwired_on_bus[static_cast<std::size_t>(h.bus)].push_back(h.port);
    port_hardwired[static_cast<std::size_t>(h.port)] = true;
  }
  std::vector<std::size_t> candidates;
  const auto& sw = layout.switches();
  for (std::size_t i = 0; i < sw.size(); ++i) {
    const int g = group_of[static_cast<std::size_t>(sw[i].port)];
    if (g == -1) continue;
    const auto& wired = hardwired_on_bus[static_cast<std::size_t>(sw[i].bus)];
    const bool usable = std::all_of(wired.begin(), wired.end(),
                                    [&](int p) { return group_of[static_cast<std::size_t>(p)] == g; });
    if (usable) candidates.push_back(i);
  }
  if (candidates.size() > 24) {
    throw std::length_error("states_for_groups: too many candidate switches (" +
                            std::to_string(candidates.size()) + ")");
  }

  std::size_t lower = 0;
  for (int p = 1; p <= layout.n_ports(); ++p) {
    if (group_of[static_cast<std::size_t>(p)] != -1 && !port_hardwired[static_cast<std::size_t>(p)]) ++lower;
  }

  const std::size_t n = candidates.size();
  std::vector<std::size_t> pick;
  for (std::size_t k = lower; k <= n; ++k) {
    pick.resize(k);
    for (std::size_t i = 0; i < k; ++i) pick[i] = i;
    while (true) {
      SwitchStateVector s = SwitchStateVector::all_open(layout);
      for (std::size_t i : pick) s.closed[candidates[i]] = true;
      if (connectivity(layout, s) == target) return s;
      // Next k-combination in lexicographic order.
      std::size_t i = k;
      while (i > 0 && pick[i - 1] == n - k + (i - 1)) --i;
      if (i == 0) break;
      ++pick[i - 1];
      for (std::size_t j = i; j < k; ++j) pick[j] = pick[j - 1] + 1;
    }
  }
  return std::nullopt;
}

std::optional<SwitchStateVector> states_for_pairs(const MatrixLayout& layout,
                                                  const std::vector<std::pair<int, int>>& pairs) {
  std::vector<std::vector<int>> groups;
  groups.reserve(pairs.size());
  for (const auto& [a, b] : pairs) {
    if (a == b) throw std::invalid_argument("pair connects port " + std::to_string(a) + " to itself");
    groups.push_back({a, b});
  }
  return states_for_groups(layout, groups);
}

}  // namespace gridroute
