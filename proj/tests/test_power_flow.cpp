#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"

#include "gridroute/power_flow.hpp"

using namespace gridroute;

namespace {

std::vector<NetInjection> inj(std::initializer_list<std::pair<int, double>> v) {
  std::vector<NetInjection> out;
  for (const auto& [p, w] : v) out.push_back({p, w, 0.0});
  return out;
}

double flow(const StepFlows& f, int port) { return f.flow(port)->power_w; }

}  // namespace

TEST_CASE("mode A pair balances") {
  ConnectivityGraph g{{{1}, {2, 3}, {4}}};
  auto f = solve_step(g, inj({{1, 0}, {2, -500}, {3, 500}, {4, 0}}));
  CHECK(f.all_feasible());
  CHECK(flow(f, 3) == 500.0);
  CHECK(flow(f, 2) == -500.0);
  CHECK(flow(f, 1) == 0.0);
  CHECK(f.flow(1)->served);
  CHECK(f.groups[1].residual_w == 0.0);
}

TEST_CASE("three-port group balances") {
  ConnectivityGraph g{{{1, 2, 3}}};
  auto f = solve_step(g, inj({{1, 300}, {2, -200}, {3, -100}}));
  CHECK(f.all_feasible());
  CHECK(std::all_of(f.flows.begin(), f.flows.end(), [](const PortFlow& x) { return x.served; }));
}

TEST_CASE("unbalanced pair without slack is de-energized") {
  ConnectivityGraph g{{{1}, {2, 3}}};
  auto f = solve_step(g, inj({{1, 0}, {2, -700}, {3, 500}}));
  CHECK_FALSE(f.all_feasible());
  CHECK_FALSE(f.flow(2)->served);
  CHECK_FALSE(f.flow(3)->served);
  CHECK(flow(f, 2) == 0.0);
  CHECK(f.flow(1)->served);
  CHECK(f.groups[1].residual_w == doctest::Approx(-200));
}

TEST_CASE("singleton with nonzero injection and no slack is infeasible") {
  ConnectivityGraph g{{{1}}};
  auto f = solve_step(g, inj({{1, 50}}));
  CHECK_FALSE(f.all_feasible());
  CHECK_FALSE(f.flow(1)->served);
}

TEST_CASE("slack absorbs residual within limits") {
  ConnectivityGraph g{{{1, 2, 3}}};
  auto f = solve_step(g, inj({{1, 300}, {2, -100}, {3, 0}}), {{3, {-1000, 1000}}});
  CHECK(f.all_feasible());
  CHECK(flow(f, 3) == -200.0);
  CHECK(f.groups[0].slack_port == 3);

  auto over = solve_step(g, inj({{1, 300}, {2, -100}, {3, 0}}), {{3, {-150, 150}}});
  CHECK_FALSE(over.all_feasible());
}

TEST_CASE("slacks fill in ascending port order") {
  ConnectivityGraph g{{{1, 2, 3}}};
  auto f = solve_step(g, inj({{1, 500}, {2, 0}, {3, 0}}), {{2, {-200, 0}}, {3, {-1000, 0}}});
  CHECK(flow(f, 2) == -200.0);
  CHECK(flow(f, 3) == -300.0);
}

TEST_CASE("missing or duplicate injections throw") {
  ConnectivityGraph g{{{1, 2}}};
  CHECK_THROWS_AS(solve_step(g, inj({{1, 0}})), std::invalid_argument);
  CHECK_THROWS_AS(solve_step(g, inj({{1, 0}, {2, 0}, {2, 0}})), std::invalid_argument);
}

TEST_CASE("bidirectional flow at port 3 across modes") {
  auto a = solve_step({{{1}, {2, 3}, {4}}}, inj({{1, 0}, {2, -500}, {3, 500}, {4, 0}}));
  auto b = solve_step({{{1, 3}, {2}, {4}}}, inj({{1, 500}, {2, 0}, {3, -500}, {4, 0}}));
  CHECK(flow(a, 3) > 0.0);
  CHECK(flow(b, 3) < 0.0);
}

TEST_CASE("conservation and permutation invariance on random groups") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-2000.0, 2000.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 7);
    std::vector<int> ports(static_cast<std::size_t>(n));
    std::iota(ports.begin(), ports.end(), 1);
    std::shuffle(ports.begin(), ports.end(), rng);
    // Random partition with one slack per group.
    ConnectivityGraph g;
    std::map<int, SlackLimits> slacks;
    std::size_t i = 0;
    while (i < ports.size()) {
      std::size_t len = 1 + rng() % (ports.size() - i);
      std::vector<int> grp(ports.begin() + static_cast<long>(i), ports.begin() + static_cast<long>(i + len));
      std::sort(grp.begin(), grp.end());
      slacks[grp.back()] = {-1e6, 1e6};
      g.groups.push_back(grp);
      i += len;
    }
    std::sort(g.groups.begin(), g.groups.end());
    std::vector<NetInjection> injections;
    for (int p = 1; p <= n; ++p) injections.push_back({p, u(rng), 0.0});
    auto f = solve_step(g, injections, slacks);
    REQUIRE(f.all_feasible());
    for (const auto& grp : g.groups) {
      double sum = 0.0;
      for (int p : grp) sum += flow(f, p);
      CHECK(std::abs(sum) <= kBalanceTolerance);
    }

    // Relabel p -> n + 1 - p.
    auto relabel = [n](int p) { return n + 1 - p; };
    ConnectivityGraph g2;
    for (auto grp : g.groups) {
      for (int& p : grp) p = relabel(p);
      std::sort(grp.begin(), grp.end());
      g2.groups.push_back(grp);
    }
    std::sort(g2.groups.begin(), g2.groups.end());
    std::map<int, SlackLimits> s2;
    for (const auto& [p, l] : slacks) s2[relabel(p)] = l;
    std::vector<NetInjection> i2;
    for (const auto& x : injections) i2.push_back({relabel(x.port_id), x.power_w, 0.0});
    auto f2 = solve_step(g2, i2, s2);
    for (int p = 1; p <= n; ++p) {
      // Summation order changes with the labels, so equality is up to rounding.
      CHECK(flow(f2, relabel(p)) == doctest::Approx(flow(f, p)).epsilon(1e-12).scale(1e3));
    }
  }
}
