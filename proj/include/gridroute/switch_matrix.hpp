#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace gridroute {

/// A (port, bus) attachment point. Ports are 1-based, buses 0-based (0 = "A").
struct Attachment {
  int port = 0;
  int bus = 0;
  auto operator<=>(const Attachment&) const = default;
};

std::string bus_name(int bus);
/// "SW" + port + bus letter, e.g. SW2A.
std::string switch_name(const Attachment& a);

/// Crossbar of ideal bidirectional switch units between ports and buses.
class MatrixLayout {
 public:
  /// Throws std::invalid_argument when the description is inconsistent
  /// (out-of-range ids, duplicates, or a pair that is both switched and hardwired).
  MatrixLayout(std::string name, int n_ports, int n_buses, std::vector<Attachment> switches,
               std::vector<Attachment> hardwires);

  /// Ports 1,2 switched onto buses A/B; port 3 hardwired to A, port 4 to B.
  static MatrixLayout prototype4();
  /// Every port switchable onto both buses; no hardwires.
  static MatrixLayout full4x2();
  /// n ports each switchable onto a single shared bus.
  static MatrixLayout star(int n_ports);
  /// Throws std::invalid_argument for an unknown name.
  static MatrixLayout named(const std::string& name);

  const std::string& name() const { return name_; }
  int n_ports() const { return n_ports_; }
  int n_buses() const { return n_buses_; }
  /// Sorted by (port, bus); a state vector is indexed in this order.
  const std::vector<Attachment>& switches() const { return switches_; }
  const std::vector<Attachment>& hardwires() const { return hardwires_; }

  std::optional<std::size_t> switch_index(const Attachment& a) const;
  bool has_port(int port) const { return port >= 1 && port <= n_ports_; }

 private:
  std::string name_;
  int n_ports_;
  int n_buses_;
  std::vector<Attachment> switches_;
  std::vector<Attachment> hardwires_;
};

struct SwitchStateVector {
  std::vector<bool> closed;  // aligned with MatrixLayout::switches()

  static SwitchStateVector all_open(const MatrixLayout& layout);
  /// Bit i of mask closes switch i.
  static SwitchStateVector from_mask(const MatrixLayout& layout, unsigned long long mask);

  std::size_t size() const { return closed.size(); }
  bool matches(const MatrixLayout& layout) const { return closed.size() == layout.switches().size(); }
  std::size_t closed_count() const;
  bool operator==(const SwitchStateVector&) const = default;
};

/// "(OFF,OFF,ON,OFF)"
std::string format_states(const SwitchStateVector& states);

/// Partition of ports into electrically connected groups, each sorted, groups
/// ordered by their smallest port.
struct ConnectivityGraph {
  std::vector<std::vector<int>> groups;

  const std::vector<int>* group_of(int port) const;
  bool connected(int a, int b) const;
  /// Groups with at least two ports.
  std::vector<std::vector<int>> energized() const;
  bool operator==(const ConnectivityGraph&) const = default;
};

std::string format_groups(const ConnectivityGraph& graph);

/// Throws std::invalid_argument when states does not match layout.
ConnectivityGraph connectivity(const MatrixLayout& layout, const SwitchStateVector& states);

enum class PortRole { Forming, Following, Idle };

std::string to_string(PortRole role);

enum class Severity { Warning, Error };

struct StateViolation {
  Severity severity = Severity::Error;
  std::string code;
  std::string message;
  std::vector<int> ports;
};

/// Checks electrical sanity of a switch configuration: every energized group
/// must contain exactly one voltage-forming port; a port closed onto two or
/// more buses is reported as a bus-merge warning. Ports missing from roles are
/// treated as Idle.
std::vector<StateViolation> validate_states(const MatrixLayout& layout, const SwitchStateVector& states,
                                            const std::map<int, PortRole>& roles);

bool has_errors(const std::vector<StateViolation>& violations);

/// Minimal-cardinality, then lexicographically smallest (by (port, bus))
/// closed-switch set whose connectivity equals the requested groups plus
/// singletons. std::nullopt when the layout cannot realize it.
/// Throws std::invalid_argument when groups overlap or name unknown ports.
std::optional<SwitchStateVector> states_for_groups(const MatrixLayout& layout,
                                                   const std::vector<std::vector<int>>& groups);

std::optional<SwitchStateVector> states_for_pairs(const MatrixLayout& layout,
                                                  const std::vector<std::pair<int, int>>& pairs);

}  // namespace gridroute
