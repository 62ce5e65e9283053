#pragma once

// Scenario configuration: a YAML document with the unit in every key name.
// Parsing is strict; unknown keys and out-of-range values raise ConfigError
// naming the offending key path.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "qft/counting.hpp"
#include "qft/dispersion.hpp"

namespace qft::config {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key_path, const std::string& message);
  const std::string& key_path() const noexcept { return key_path_; }

 private:
  std::string key_path_;
};

struct PhasematchSettings {
  std::string fiber = "fiber1";
  double pump_start_nm = 800.0;
  double pump_stop_nm = 830.0;
  int pump_steps = 31;
  double pump_power_mw = 0.0;
  dispersion::Axis pump_axis = dispersion::Axis::slow;
  dispersion::Axis signal_axis = dispersion::Axis::fast;
  dispersion::Axis idler_axis = dispersion::Axis::fast;

  bool operator==(const PhasematchSettings&) const = default;
};

struct TranslatorSettings {
  std::string fiber = "fiber2";
  double pump1_wavelength_nm = 808.0;
  double pump1_power_mw = 20.0;
  double pump2_wavelength_nm = 845.0;
  double pump2_power_mw = 30.0;
  double signal1_wavelength_nm = 683.0;
  double overlap = 1.0;
  dispersion::Axis axis = dispersion::Axis::fast;
  /// When set, |kappa| L is pinned to reach this efficiency at delta = 0,
  /// replacing the pump-power estimate.
  std::optional<double> target_efficiency;
  int z_steps = 64;

  bool operator==(const TranslatorSettings&) const = default;
};

struct AcceptanceSettings {
  double input_center_nm = 683.0;
  double input_fwhm_nm = 2.0;
  double span_nm = 16.0;
  int samples = 1601;
  /// Exactly one of the two fixes the walk-off.
  std::optional<double> target_translated_fwhm_nm = 1.45;
  std::optional<double> walkoff_ps_per_m;

  bool operator==(const AcceptanceSettings&) const = default;
};

struct CalibrationSettings {
  bool enabled = false;
  counting::CalibrationTargets targets;

  bool operator==(const CalibrationSettings& o) const {
    return enabled == o.enabled &&
           targets.untranslated_noise_fraction == o.targets.untranslated_noise_fraction &&
           targets.translated_noise_fraction == o.targets.translated_noise_fraction &&
           targets.untranslated_car == o.targets.untranslated_car;
  }
};

struct CountingSettings {
  int runs = 30;
  std::uint64_t pulses_per_run = 1'000'000;
  unsigned threads = 0;
  /// eta(s2 detectors) / eta(s1 detectors) used by the creation estimate;
  /// derived from the detector settings when absent.
  std::optional<double> detector_ratio;

  bool operator==(const CountingSettings&) const = default;
};

struct SweepSettings {
  std::string parameter;  // dotted key path, e.g. source.epsilon
  double start = 0.0;
  double stop = 0.0;
  int steps = 0;

  bool operator==(const SweepSettings&) const = default;
};

struct ScenarioConfig {
  std::string name = "scenario";
  std::optional<std::uint64_t> seed;
  std::map<std::string, dispersion::FiberSpec> fibers;
  PhasematchSettings phasematch;
  TranslatorSettings translator;
  AcceptanceSettings acceptance;
  source::SourceSpec source;
  counting::DetectorSetup detectors;
  counting::NoiseSpec noise;
  CalibrationSettings calibration;
  CountingSettings counting;
  std::optional<SweepSettings> sweep;
  std::string output_dir = "out";

  bool operator==(const ScenarioConfig&) const = default;

  /// Throws ConfigError when cross-references or ranges are invalid.
  void validate() const;
  const dispersion::FiberSpec& fiber(const std::string& key, const std::string& path) const;
};

/// Parses YAML text. `fibers` entries may name a built-in preset (`preset:`),
/// a preset file relative to base_dir (`file:`), and override single fields.
ScenarioConfig parse_config(std::string_view yaml_text,
                            const std::filesystem::path& base_dir = {});
ScenarioConfig load_config(const std::filesystem::path& path);

/// Canonical YAML with every field written out; parse_config(serialize(c)) == c.
std::string serialize(const ScenarioConfig& config);

/// Hex SHA-256 of serialize(config).
std::string config_hash(const ScenarioConfig& config);

/// Returns a copy with the value at a dotted key path replaced, re-validated.
ScenarioConfig with_parameter(const ScenarioConfig& config, const std::string& key_path,
                              double value);

/// Named scenarios compiled into the binary ("paper_calibrated", "ideal_source").
std::optional<ScenarioConfig> builtin_scenario(std::string_view name);

/// Fiber preset file contents (a `fiber:` document) for a FiberSpec.
std::string serialize_fiber(const dispersion::FiberSpec& fiber);
dispersion::FiberSpec parse_fiber_file(const std::filesystem::path& path);

}  // namespace qft::config
