#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gridroute {

struct Sample {
  double voltage_v = 0.0;
  double current_a = 0.0;
};

/// Sampled voltage/current at one router port. Current is positive when it
/// flows into the router, so positive mean power means the port exports.
struct WaveformFrame {
  int port_id = 0;
  double sample_rate_hz = 0.0;
  double line_freq_hz = 0.0;
  std::vector<Sample> samples;

  double duration_s() const { return static_cast<double>(samples.size()) / sample_rate_hz; }
};

class SampleRateTooLow : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Minimum samples per line cycle for phase classification.
inline constexpr double kMinSamplesPerCycle = 20.0;
inline constexpr double kCurrentFloorA = 0.010;
inline constexpr double kPowerThresholdW = 1.0;

struct SynthParams {
  double v_rms = 200.0;
  double freq_hz = 60.0;
  double i_rms = 0.0;
  double phase_rad = 0.0;
  double duration_s = 0.1;
  double sample_rate_hz = 12000.0;
  int port_id = 0;
  /// Additive Gaussian noise on the current channel (A rms); 0 disables it.
  double current_noise_a = 0.0;
  std::uint64_t noise_seed = 0;
};

/// v(t) = sqrt2 Vrms sin(2 pi f t), i(t) = sqrt2 Irms sin(2 pi f t - phase), t = k / fs.
/// Throws SampleRateTooLow below kMinSamplesPerCycle samples per cycle and
/// std::invalid_argument for negative magnitudes or a sub-cycle duration.
WaveformFrame synth(const SynthParams& params);
WaveformFrame synth(double v_rms, double freq_hz, double i_rms, double phase_rad, double duration_s,
                    double sample_rate_hz);

/// Number of leading samples spanning the largest whole number of line cycles.
std::size_t whole_cycle_samples(const WaveformFrame& frame);

/// Mean of v*i over the whole-cycle part of the frame.
double average_power(const WaveformFrame& frame);
double rms_current(const WaveformFrame& frame);
double rms_voltage(const WaveformFrame& frame);
std::vector<double> instantaneous_power(const WaveformFrame& frame);

enum class PhaseRelation { InPhase, AntiPhase, NoCurrent, Quadrature };

std::string to_string(PhaseRelation relation);

/// NoCurrent below the current floor; otherwise the sign of mean power beyond
/// the power threshold. Quadrature covers current that carries no real power.
PhaseRelation phase_relation(const WaveformFrame& frame);

/// CSV with header `t_s,v_v,i_a`.
void write_csv(std::ostream& os, const WaveformFrame& frame);
/// Rebuilds the frame; the sample rate is inferred from the time column.
/// Throws std::runtime_error on a malformed file.
WaveformFrame read_csv(std::istream& is, double line_freq_hz, int port_id = 0);

}  // namespace gridroute
