#pragma once

// Runs one subcommand of a scenario and renders its output files. Every file
// starts with a "# config_sha256=<hash>" line; nothing time- or host-dependent
// is written, so identical configs give identical bytes.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qft/bs_translator.hpp"
#include "qft/config.hpp"
#include "qft/counting.hpp"

namespace qft::scenario {

enum class Command { phasematch, translate, acceptance, g2, efficiency, sweep };

std::optional<Command> parse_command(std::string_view name);
const char* command_name(Command command);

struct Artifact {
  std::string filename;
  std::string content;
};

/// |kappa| L grid for `translate`, written start:stop:steps.
struct KappaSweep {
  double start = 0.0;
  double stop = 0.0;
  int steps = 1;
};

/// Throws config::ConfigError on malformed text.
KappaSweep parse_kappa_sweep(std::string_view text);

dispersion::FrequencyQuartet build_quartet(const config::ScenarioConfig& config);
translator::BsCoupler build_coupler(const config::ScenarioConfig& config);
translator::SpectralProfile build_input_spectrum(const config::ScenarioConfig& config);
/// Acceptance model with the walk-off resolved from the settings.
translator::AcceptanceModel build_acceptance(const config::ScenarioConfig& config);

/// The counting experiment, calibrated when calibration.enabled is set.
counting::Experiment build_experiment(const config::ScenarioConfig& config);

/// eta(s2 detectors) / eta(s1 detectors), split-weighted, unless overridden.
double detector_ratio(const config::ScenarioConfig& config);

/// Runs `command` and returns the CSV files followed by a summary file.
std::vector<Artifact> run_scenario(const config::ScenarioConfig& config, Command command,
                                   const std::optional<KappaSweep>& kappa_sweep = {});

void write_artifacts(const std::vector<Artifact>& artifacts, const std::filesystem::path& dir);

}  // namespace qft::scenario
