#include <functional>
#include <random>

#include "doctest.h"

#include "gridroute/disjoint_set.hpp"
#include "gridroute/switch_matrix.hpp"
#include "oracles.hpp"

using namespace gridroute;

namespace {

SwitchStateVector states(std::initializer_list<int> bits) {
  SwitchStateVector s;
  for (int b : bits) s.closed.push_back(b != 0);
  return s;
}

SwitchStateVector close(const MatrixLayout& layout, std::initializer_list<Attachment> on) {
  auto s = SwitchStateVector::all_open(layout);
  for (const auto& a : on) s.closed[*layout.switch_index(a)] = true;
  return s;
}

}  // namespace

TEST_CASE("disjoint set") {
  DisjointSet ds(6);
  ds.unite(0, 1);
  ds.unite(2, 3);
  ds.unite(1, 3);
  CHECK(ds.same(0, 2));
  CHECK_FALSE(ds.same(0, 4));
  CHECK(ds.find(5) == 5);
}

TEST_CASE("prototype layout shape") {
  const auto p = MatrixLayout::prototype4();
  REQUIRE(p.switches().size() == 4);
  CHECK(switch_name(p.switches()[0]) == "SW1A");
  CHECK(switch_name(p.switches()[1]) == "SW1B");
  CHECK(switch_name(p.switches()[2]) == "SW2A");
  CHECK(switch_name(p.switches()[3]) == "SW2B");
  CHECK(p.hardwires() == std::vector<Attachment>{{3, 0}, {4, 1}});
  CHECK(MatrixLayout::full4x2().switches().size() == 8);
  CHECK(MatrixLayout::full4x2().hardwires().empty());
}

TEST_CASE("layout constructor rejects inconsistent descriptions") {
  CHECK_THROWS_AS(MatrixLayout("x", 2, 1, {{1, 0}}, {{1, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(MatrixLayout("x", 2, 1, {{3, 0}}, {}), std::invalid_argument);
  CHECK_THROWS_AS(MatrixLayout("x", 2, 1, {{1, 0}, {1, 0}}, {}), std::invalid_argument);
  CHECK_THROWS_AS(MatrixLayout("x", 1, 1, {}, {}), std::invalid_argument);
  CHECK_THROWS_AS(MatrixLayout::named("hexagon"), std::invalid_argument);
  CHECK(MatrixLayout::named("star6").n_ports() == 6);
}

TEST_CASE("connectivity examples") {
  const auto p = MatrixLayout::prototype4();
  auto a = connectivity(p, states({0, 0, 1, 0}));
  CHECK(format_groups(a) == "{{1},{2,3},{4}}");
  CHECK(a.connected(2, 3));
  CHECK_FALSE(a.connected(1, 3));
  CHECK(format_groups(connectivity(p, SwitchStateVector::all_open(p))) == "{{1},{2},{3},{4}}");

  const auto f = MatrixLayout::full4x2();
  auto g = connectivity(f, close(f, {{1, 0}, {2, 0}, {3, 1}, {4, 1}}));
  CHECK(g.groups == std::vector<std::vector<int>>{{1, 2}, {3, 4}});
  CHECK(g.energized().size() == 2);
  CHECK_THROWS_AS(connectivity(p, states({1, 0})), std::invalid_argument);
}

TEST_CASE("connectivity agrees with BFS reachability on every state") {
  for (const auto& layout : {MatrixLayout::prototype4(), MatrixLayout::full4x2()}) {
    const std::size_t n = layout.switches().size();
    for (unsigned long long m = 0; m < (1ULL << n); ++m) {
      const auto s = SwitchStateVector::from_mask(layout, m);
      CHECK(connectivity(layout, s).groups == oracle::reach_groups(layout, s));
    }
  }
}

TEST_CASE("closing a switch never splits a group") {
  const auto f = MatrixLayout::full4x2();
  for (unsigned long long m = 0; m < 256; ++m) {
    const auto before = connectivity(f, SwitchStateVector::from_mask(f, m));
    for (int i = 0; i < 8; ++i) {
      if (m & (1ULL << i)) continue;
      const auto after = connectivity(f, SwitchStateVector::from_mask(f, m | (1ULL << i)));
      for (int a = 1; a <= 4; ++a) {
        for (int b = 1; b <= 4; ++b) {
          if (before.connected(a, b)) CHECK(after.connected(a, b));
        }
      }
    }
  }
}

TEST_CASE("states_for_pairs reproduces the published mode vectors") {
  const auto p = MatrixLayout::prototype4();
  auto a = states_for_pairs(p, {{3, 2}});
  REQUIRE(a);
  CHECK(format_states(*a) == "(OFF,OFF,ON,OFF)");
  auto b = states_for_pairs(p, {{1, 3}});
  REQUIRE(b);
  CHECK(format_states(*b) == "(ON,OFF,OFF,OFF)");
  CHECK_FALSE(states_for_pairs(p, {{3, 4}}));
  CHECK(states_for_pairs(p, {}) == SwitchStateVector::all_open(p));
}

TEST_CASE("states_for_pairs rejects overlapping or unknown ports") {
  const auto p = MatrixLayout::prototype4();
  CHECK_THROWS_AS(states_for_pairs(p, {{1, 2}, {2, 3}}), std::invalid_argument);
  CHECK_THROWS_AS(states_for_pairs(p, {{1, 9}}), std::invalid_argument);
}

TEST_CASE("states_for_groups matches exhaustive search and round-trips") {
  for (const auto& layout : {MatrixLayout::prototype4(), MatrixLayout::full4x2()}) {
    // Every set partition of {1,2,3,4}.
    std::vector<std::vector<std::vector<int>>> partitions;
    std::vector<int> label(4, 0);
    std::function<void(int, int)> rec = [&](int i, int used) {
      if (i == 4) {
        std::vector<std::vector<int>> groups(static_cast<std::size_t>(used));
        for (int p = 0; p < 4; ++p) groups[static_cast<std::size_t>(label[static_cast<std::size_t>(p)])].push_back(p + 1);
        std::vector<std::vector<int>> multi;
        for (auto& g : groups) {
          if (g.size() >= 2) multi.push_back(g);
        }
        partitions.push_back(multi);
        return;
      }
      for (int l = 0; l <= used; ++l) {
        label[static_cast<std::size_t>(i)] = l;
        rec(i + 1, std::max(used, l + 1));
      }
    };
    rec(0, 0);
    CHECK(partitions.size() == 15);
    for (const auto& groups : partitions) {
      const auto got = states_for_groups(layout, groups);
      const auto want = oracle::exhaustive_states(layout, groups);
      CHECK(got.has_value() == want.has_value());
      if (got && want) {
        CHECK(*got == *want);
        CHECK(connectivity(layout, *got).groups == oracle::with_singletons(layout, groups));
      }
    }
  }
}

TEST_CASE("full layout realizes all three two-pair pairings") {
  const auto f = MatrixLayout::full4x2();
  for (auto pairs : std::vector<std::vector<std::pair<int, int>>>{{{1, 2}, {3, 4}}, {{1, 3}, {2, 4}}, {{1, 4}, {2, 3}}}) {
    auto s = states_for_pairs(f, pairs);
    REQUIRE(s);
    auto g = connectivity(f, *s);
    CHECK(g.connected(pairs[0].first, pairs[0].second));
    CHECK(g.connected(pairs[1].first, pairs[1].second));
    CHECK(g.energized().size() == 2);
  }
}

TEST_CASE("validate_states") {
  const auto p = MatrixLayout::prototype4();
  const auto a = states({0, 0, 1, 0});
  CHECK(validate_states(p, a, {{3, PortRole::Forming}, {2, PortRole::Following}}).empty());

  const auto f = MatrixLayout::full4x2();
  auto both = close(f, {{1, 0}, {2, 0}});
  auto v = validate_states(f, both, {{1, PortRole::Forming}, {2, PortRole::Forming}});
  REQUIRE(v.size() == 1);
  CHECK(v[0].code == "forming_count");
  CHECK(has_errors(v));
  auto none = validate_states(f, both, {});
  CHECK(none.size() == 1);

  auto merge = validate_states(p, states({1, 1, 0, 0}), {{1, PortRole::Forming}});
  REQUIRE(merge.size() == 1);
  CHECK(merge[0].code == "bus_merge");
  CHECK(merge[0].severity == Severity::Warning);
  CHECK_FALSE(has_errors(merge));
  // The oracle agrees that the two buses merge: ports 3 and 4 join.
  CHECK(oracle::reach_groups(p, states({1, 1, 0, 0})) == std::vector<std::vector<int>>{{1, 3, 4}, {2}});
}

TEST_CASE("star layout joins any port subset to a hub") {
  const auto s = MatrixLayout::star(13);
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> g{13};
    for (int p = 1; p < 13; ++p) {
      if (rng() % 2) g.push_back(p);
    }
    if (g.size() < 2) continue;
    auto st = states_for_groups(s, {g});
    REQUIRE(st);
    CHECK(st->closed_count() == g.size());
  }
}

TEST_CASE("closure oracle agrees with exhaustive search for single groups") {
  for (const auto& layout : {MatrixLayout::prototype4(), MatrixLayout::full4x2()}) {
    for (unsigned m = 0; m < 16; ++m) {
      std::vector<int> g;
      for (int p = 1; p <= 4; ++p) {
        if (m & (1u << (p - 1))) g.push_back(p);
      }
      if (g.size() < 2) continue;
      CHECK(oracle::realizable(layout, g) == oracle::exhaustive_states(layout, {g}).has_value());
    }
  }
}
