#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"

#include "gridroute/waveform_lab.hpp"
#include "oracles.hpp"

using namespace gridroute;

TEST_CASE("synth examples") {
  auto a = synth(200, 60, 2.5, 0, 0.1, 12000);
  CHECK(a.samples.size() == 1200);
  CHECK(average_power(a) == doctest::Approx(500.0).epsilon(1e-9));
  CHECK(oracle::sampled_mean_power(200, 2.5, 0, 60, 12000, 1200) == doctest::Approx(500.0).epsilon(1e-9));

  auto z = synth(200, 60, 0, 0, 0.1, 12000);
  for (const auto& s : z.samples) CHECK(s.current_a == 0.0);
  CHECK(average_power(z) == 0.0);
  CHECK(phase_relation(z) == PhaseRelation::NoCurrent);

  auto n = synth(200, 60, 2.5, std::numbers::pi, 0.1, 12000);
  CHECK(average_power(n) == doctest::Approx(-500.0).epsilon(1e-9));
  CHECK(phase_relation(n) == PhaseRelation::AntiPhase);
  CHECK(phase_relation(a) == PhaseRelation::InPhase);
}

TEST_CASE("sample formula") {
  auto f = synth(200, 60, 2.5, 0.3, 0.1, 12000);
  for (std::size_t k : {0u, 7u, 333u, 1199u}) {
    const double t = static_cast<double>(k) / 12000.0;
    CHECK(f.samples[k].voltage_v == doctest::Approx(std::sqrt(2.0) * 200 * std::sin(2 * std::numbers::pi * 60 * t)));
    CHECK(f.samples[k].current_a ==
          doctest::Approx(std::sqrt(2.0) * 2.5 * std::sin(2 * std::numbers::pi * 60 * t - 0.3)));
  }
  CHECK(rms_voltage(f) == doctest::Approx(200.0).epsilon(1e-9));
  CHECK(rms_current(f) == doctest::Approx(2.5).epsilon(1e-9));
}

TEST_CASE("synth preconditions") {
  CHECK_THROWS_AS(synth(200, 60, 1, 0, 0.1, 1000), SampleRateTooLow);
  CHECK_NOTHROW(synth(200, 60, 1, 0, 0.1, 1200));
  CHECK_THROWS_AS(synth(-1, 60, 1, 0, 0.1, 12000), std::invalid_argument);
  CHECK_THROWS_AS(synth(200, 60, 1, 0, 0.01, 12000), std::invalid_argument);
}

TEST_CASE("average power equals V I cos phi over a grid") {
  int cases = 0;
  for (double v : {100.0, 200.0, 230.0, 400.0}) {
    for (double i : {0.05, 1.0, 2.5, 10.0, 37.0}) {
      for (double phi : {0.0, 0.4, 1.0, 2.0, 2.9, std::numbers::pi}) {
        auto f = synth(v, 60, i, phi, 0.1, 12000);  // 200 samples per cycle, 6 cycles
        const double want = v * i * std::cos(phi);
        const double got = average_power(f);
        CHECK(std::abs(got - want) <= 1e-6 * v * i);
        ++cases;
      }
    }
  }
  CHECK(cases >= 100);
}

TEST_CASE("whole-cycle trimming removes partial-cycle bias") {
  // 0.105 s is 6.3 cycles; trimming keeps exactly 6.
  auto f = synth(200, 60, 2.5, 0, 0.105, 12000);
  CHECK(whole_cycle_samples(f) == 1200);
  CHECK(average_power(f) == doctest::Approx(500.0).epsilon(1e-9));
}

TEST_CASE("instantaneous power ripple sits at twice the line frequency") {
  auto f = synth(200, 60, 2.5, 0, 0.1, 12000);
  auto p = instantaneous_power(f);
  double mean = 0;
  for (double x : p) mean += x;
  mean /= static_cast<double>(p.size());
  CHECK(mean > 0.0);
  for (double& x : p) x -= mean;
  const double at2f = oracle::dft_magnitude(p, 12000, 120);
  CHECK(at2f == doctest::Approx(250.0).epsilon(1e-6));  // amplitude V I / 2 per side
  for (double freq : {10.0, 60.0, 180.0, 240.0, 600.0}) {
    CHECK(oracle::dft_magnitude(p, 12000, freq) < 1e-6 * at2f);
  }
}

TEST_CASE("phase classes above the current floor") {
  for (double v : {50.0, 200.0}) {
    for (double i : {0.02, 1.0, 5.0}) {
      CHECK(phase_relation(synth(v, 60, i, 0, 0.1, 12000)) == PhaseRelation::InPhase);
      CHECK(phase_relation(synth(v, 60, i, std::numbers::pi, 0.1, 12000)) == PhaseRelation::AntiPhase);
    }
  }
  CHECK(phase_relation(synth(200, 60, 0.005, 0, 0.1, 12000)) == PhaseRelation::NoCurrent);
  CHECK(phase_relation(synth(200, 60, 2.5, std::numbers::pi / 2, 0.1, 12000)) == PhaseRelation::Quadrature);
}

TEST_CASE("noise is seeded and leaves the classification intact") {
  SynthParams p;
  p.i_rms = 2.5;
  p.current_noise_a = 0.05;
  p.noise_seed = 9;
  auto a = synth(p);
  auto b = synth(p);
  REQUIRE(a.samples.size() == b.samples.size());
  for (std::size_t k = 0; k < a.samples.size(); ++k) CHECK(a.samples[k].current_a == b.samples[k].current_a);
  CHECK(average_power(a) == doctest::Approx(500.0).epsilon(0.01));
  CHECK(phase_relation(a) == PhaseRelation::InPhase);
}

TEST_CASE("csv round trip") {
  auto f = synth(200, 60, 2.5, 0, 0.1, 12000);
  f.port_id = 3;
  std::stringstream ss;
  write_csv(ss, f);
  const auto text = ss.str();
  CHECK(text.rfind("t_s,v_v,i_a\n", 0) == 0);
  auto g = read_csv(ss, 60, 3);
  CHECK(g.sample_rate_hz == doctest::Approx(12000));
  REQUIRE(g.samples.size() == f.samples.size());
  CHECK(g.samples[17].voltage_v == f.samples[17].voltage_v);
  CHECK(average_power(g) == doctest::Approx(average_power(f)));
  std::stringstream bad("a,b\n1,2\n");
  CHECK_THROWS_AS(read_csv(bad, 60), std::runtime_error);
}
