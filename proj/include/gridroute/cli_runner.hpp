#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gridroute/waveform_lab.hpp"

namespace gridroute::cli {

/// Exit codes shared by all commands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitViolations = 1;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitInfeasible = 3;

/// Reads GRIDROUTE_LOG (trace, debug, info, warn, error, off); default warn.
void configure_logging();

struct SimulateOptions {
  std::string scenario;
  std::optional<int> steps;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
};

int cmd_simulate(const SimulateOptions& opts, std::ostream& out, std::ostream& err);

int cmd_validate(const std::string& scenario, std::ostream& out, std::ostream& err);

/// Re-derives the ledger of a simulate output directory; exit 0 iff no divergence.
int cmd_replay(const std::string& dir, std::ostream& out, std::ostream& err);

struct PortCheck {
  int port = 0;
  double expected_w = 0.0;
  PhaseRelation expected_phase = PhaseRelation::NoCurrent;
  double scheduled_w = 0.0;
  double average_power_w = 0.0;
  double i_rms_a = 0.0;
  PhaseRelation phase = PhaseRelation::NoCurrent;
  bool pass = false;
};

struct ModeReport {
  char mode = 'A';
  int step = 0;
  std::string switch_states;
  std::vector<PortCheck> ports;
  std::vector<WaveformFrame> frames;
  bool pass = false;

  const PortCheck& port(int id) const;
};

struct ExperimentOptions {
  std::string mode = "AB";
  std::string out_dir = "experiment";
  double current_noise_a = 0.0;
  std::uint64_t seed = 0;
};

/// Runs the built-in three-house scenario and checks one mode's port
/// waveforms: 500 W within 1%, idle ports within 5 W, and the phase classes.
ModeReport replicate_mode(char mode, double current_noise_a = 0.0, std::uint64_t seed = 0);

int cmd_replicate_experiment(const ExperimentOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace gridroute::cli
