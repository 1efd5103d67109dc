#include "gridroute/waveform_lab.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

namespace gridroute {

namespace {

std::string shortest(double x) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw std::runtime_error("waveform csv: bad number '" + s + "'");
  }
  return v;
}

}  // namespace

WaveformFrame synth(const SynthParams& p) {
  if (!(p.v_rms >= 0.0 && p.i_rms >= 0.0 && p.freq_hz > 0.0 && p.current_noise_a >= 0.0)) {
    throw std::invalid_argument("synth: magnitudes must be nonnegative and frequency positive");
  }
  if (p.sample_rate_hz < kMinSamplesPerCycle * p.freq_hz) {
    throw SampleRateTooLow("synth: " + shortest(p.sample_rate_hz) + " Hz is below " +
                           shortest(kMinSamplesPerCycle) + " samples per " + shortest(p.freq_hz) + " Hz cycle");
  }
  const auto n = static_cast<std::size_t>(std::llround(p.duration_s * p.sample_rate_hz));
  if (static_cast<double>(n) + 0.5 < p.sample_rate_hz / p.freq_hz) {
    throw std::invalid_argument("synth: duration shorter than one line cycle");
  }

  WaveformFrame f;
  f.port_id = p.port_id;
  f.sample_rate_hz = p.sample_rate_hz;
  f.line_freq_hz = p.freq_hz;
  f.samples.resize(n);
  const double v_peak = std::numbers::sqrt2 * p.v_rms;
  const double i_peak = std::numbers::sqrt2 * p.i_rms;
  const double w = 2.0 * std::numbers::pi * p.freq_hz;
  std::mt19937_64 rng(p.noise_seed);
  std::normal_distribution<double> noise(0.0, p.current_noise_a > 0.0 ? p.current_noise_a : 1.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) / p.sample_rate_hz;
    f.samples[k].voltage_v = v_peak * std::sin(w * t);
    f.samples[k].current_a = i_peak * std::sin(w * t - p.phase_rad);
    if (p.current_noise_a > 0.0) f.samples[k].current_a += noise(rng);
  }
  return f;
}

WaveformFrame synth(double v_rms, double freq_hz, double i_rms, double phase_rad, double duration_s,
                    double sample_rate_hz) {
  SynthParams p;
  p.v_rms = v_rms;
  p.freq_hz = freq_hz;
  p.i_rms = i_rms;
  p.phase_rad = phase_rad;
  p.duration_s = duration_s;
  p.sample_rate_hz = sample_rate_hz;
  return synth(p);
}

std::size_t whole_cycle_samples(const WaveformFrame& frame) {
  const std::size_t n = frame.samples.size();
  if (frame.line_freq_hz <= 0.0 || frame.sample_rate_hz <= 0.0) return n;
  const double per_cycle = frame.sample_rate_hz / frame.line_freq_hz;
  const double cycles = std::floor(static_cast<double>(n) / per_cycle + 1e-9);
  if (cycles < 1.0) return n;
  const auto used = static_cast<std::size_t>(std::llround(cycles * per_cycle));
  return std::min(used, n);
}

double average_power(const WaveformFrame& frame) {
  const std::size_t n = whole_cycle_samples(frame);
  if (n == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) sum += frame.samples[k].voltage_v * frame.samples[k].current_a;
  return sum / static_cast<double>(n);
}

double rms_current(const WaveformFrame& frame) {
  const std::size_t n = whole_cycle_samples(frame);
  if (n == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) sum += frame.samples[k].current_a * frame.samples[k].current_a;
  return std::sqrt(sum / static_cast<double>(n));
}

double rms_voltage(const WaveformFrame& frame) {
  const std::size_t n = whole_cycle_samples(frame);
  if (n == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) sum += frame.samples[k].voltage_v * frame.samples[k].voltage_v;
  return std::sqrt(sum / static_cast<double>(n));
}

std::vector<double> instantaneous_power(const WaveformFrame& frame) {
  std::vector<double> p(frame.samples.size());
  for (std::size_t k = 0; k < p.size(); ++k) p[k] = frame.samples[k].voltage_v * frame.samples[k].current_a;
  return p;
}

std::string to_string(PhaseRelation relation) {
  switch (relation) {
    case PhaseRelation::InPhase:
      return "InPhase";
    case PhaseRelation::AntiPhase:
      return "AntiPhase";
    case PhaseRelation::NoCurrent:
      return "NoCurrent";
    case PhaseRelation::Quadrature:
      return "Quadrature";
  }
  return "NoCurrent";
}

PhaseRelation phase_relation(const WaveformFrame& frame) {
  if (rms_current(frame) < kCurrentFloorA) return PhaseRelation::NoCurrent;
  const double p = average_power(frame);
  if (p > kPowerThresholdW) return PhaseRelation::InPhase;
  if (p < -kPowerThresholdW) return PhaseRelation::AntiPhase;
  return PhaseRelation::Quadrature;
}

void write_csv(std::ostream& os, const WaveformFrame& frame) {
  os << "t_s,v_v,i_a\n";
  for (std::size_t k = 0; k < frame.samples.size(); ++k) {
    const double t = static_cast<double>(k) / frame.sample_rate_hz;
    os << shortest(t) << ',' << shortest(frame.samples[k].voltage_v) << ',' << shortest(frame.samples[k].current_a)
       << '\n';
  }
}

WaveformFrame read_csv(std::istream& is, double line_freq_hz, int port_id) {
  std::string line;
  if (!std::getline(is, line) || line != "t_s,v_v,i_a") {
    throw std::runtime_error("waveform csv: expected header t_s,v_v,i_a");
  }
  WaveformFrame f;
  f.port_id = port_id;
  f.line_freq_hz = line_freq_hz;
  std::vector<double> times;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string a, b, c;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c)) {
      throw std::runtime_error("waveform csv: expected three columns in '" + line + "'");
    }
    times.push_back(parse_double(a));
    f.samples.push_back({parse_double(b), parse_double(c)});
  }
  if (times.size() < 2) throw std::runtime_error("waveform csv: need at least two samples");
  const double span = times.back() - times.front();
  if (!(span > 0.0)) throw std::runtime_error("waveform csv: time column must increase");
  double fs = static_cast<double>(times.size() - 1) / span;
  const double rounded = std::round(fs);
  if (std::abs(fs - rounded) <= 1e-6 * fs) fs = rounded;
  f.sample_rate_hz = fs;
  return f;
}

}  // namespace gridroute
