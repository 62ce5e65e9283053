#pragma once

// Gated photon-counting Monte Carlo for the heralded, frequency-translated
// source, and the estimators built on its tallies.
//
// Channel layout: the herald detector C watches the idler. Each signal
// channel (untranslated s1, translated s2) is split onto a detector pair A/B.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "qft/bs_translator.hpp"
#include "qft/detector.hpp"
#include "qft/mi_source.hpp"

namespace qft::counting {

enum class Channel { untranslated, translated };

/// Mean Poisson background photons per pulse arriving at each signal channel.
struct NoiseSpec {
  double untranslated_mean = 0.0;
  double translated_mean = 0.0;

  void validate() const;
  double mean(Channel ch) const {
    return ch == Channel::untranslated ? untranslated_mean : translated_mean;
  }
  bool operator==(const NoiseSpec&) const = default;
};

struct ChannelDetectors {
  DetectorSpec a{1.0, 0.0, "A"};
  DetectorSpec b{1.0, 0.0, "B"};
  double split_to_a = 0.5;  // beamsplitter reflectivity onto A

  void validate() const;
  bool operator==(const ChannelDetectors&) const = default;
};

struct DetectorSetup {
  ChannelDetectors untranslated;
  ChannelDetectors translated;

  const ChannelDetectors& channel(Channel ch) const {
    return ch == Channel::untranslated ? untranslated : translated;
  }
  bool operator==(const DetectorSetup&) const = default;
};

/// Everything the pulse loop needs. The translator enters only through the
/// single-photon translation probability |nu(L)|^2.
struct Experiment {
  source::SourceSpec source;
  double translation_probability = 0.0;
  DetectorSetup detectors;
  NoiseSpec noise;

  static Experiment with_coupler(const source::SourceSpec& source,
                                 const translator::BsCoupler& coupler,
                                 const DetectorSetup& detectors, const NoiseSpec& noise);
  void validate() const;

  /// Pumps blocked: no translation and no pump-induced noise.
  Experiment pumps_off() const;
  /// Pumps on with the source arm blocked: noise and darks only.
  Experiment noise_only() const;
};

struct ChannelTallies {
  std::uint64_t a = 0, b = 0;            // singles
  std::uint64_t ab = 0;                  // A and B
  std::uint64_t ac = 0, bc = 0;          // with the herald
  std::uint64_t abc = 0;                 // triples
  std::uint64_t any = 0;                 // A or B
  std::uint64_t any_c = 0;               // (A or B) and C

  ChannelTallies& operator+=(const ChannelTallies& o);
  bool operator==(const ChannelTallies&) const = default;
};

/// Tallies of one run. Merging is associative and commutative.
struct PulseTrainResult {
  std::uint64_t n_pulses = 0;
  std::uint64_t c = 0;  // herald singles
  ChannelTallies untranslated;
  ChannelTallies translated;

  const ChannelTallies& channel(Channel ch) const {
    return ch == Channel::untranslated ? untranslated : translated;
  }
  ChannelTallies& channel(Channel ch) {
    return ch == Channel::untranslated ? untranslated : translated;
  }
  PulseTrainResult& operator+=(const PulseTrainResult& o);
  bool operator==(const PulseTrainResult&) const = default;

  /// N_ABC <= min(N_AC, N_BC) <= N_C <= N_p and the other orderings.
  bool invariants_hold() const;
};

PulseTrainResult merge(std::span<const PulseTrainResult> runs);

struct RunOptions {
  std::uint32_t run_id = 0;
  unsigned threads = 0;  // 0: hardware concurrency
};

/// Click pattern of one pulse; bit layout given by the Event* masks.
using EventBits = std::uint8_t;
inline constexpr EventBits kEventC = 1;
inline constexpr EventBits kEventUntranslatedA = 2;
inline constexpr EventBits kEventUntranslatedB = 4;
inline constexpr EventBits kEventTranslatedA = 8;
inline constexpr EventBits kEventTranslatedB = 16;

/// Simulates n_pulses pulses. Pulse i draws only from streams keyed by
/// (seed, i, run_id), so the result does not depend on the thread count and
/// two experiments sharing a seed use common random numbers.
PulseTrainResult run_pulse_train(const Experiment& experiment, std::uint64_t n_pulses,
                                 std::uint64_t seed, const RunOptions& options = {});

PulseTrainResult run_pulse_train(const source::SourceSpec& source,
                                 const translator::BsCoupler& coupler,
                                 const DetectorSetup& detectors, const NoiseSpec& noise,
                                 std::uint64_t n_pulses, std::uint64_t seed);

/// Per-pulse click patterns, for controls that rearrange the pulse stream.
std::vector<EventBits> record_events(const Experiment& experiment, std::uint64_t n_pulses,
                                     std::uint64_t seed, std::uint32_t run_id = 0);

/// Tallies a recorded click stream.
PulseTrainResult tally_events(std::span<const EventBits> events);

/// Permutes the herald bits against the signal bits (Fisher-Yates on a stream
/// keyed by seed), destroying pair correlations while keeping all singles.
void shuffle_herald(std::span<EventBits> events, std::uint64_t seed);

// --- estimators ------------------------------------------------------------

class InsufficientStatistics : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct G2Estimate {
  double value = 0.0;
  double std_error = 0.0;  // scatter across runs / sqrt(n_runs)
  double std_dev = 0.0;    // scatter across runs
  int n_runs = 0;
};

/// N_ABC N_C / (N_AC N_BC) for one channel. Throws InsufficientStatistics
/// when N_AC or N_BC is zero.
double g2_value(const PulseTrainResult& result, Channel ch);

/// Point estimate from the merged tallies, errors from the per-run values.
/// Runs whose own g2 is undefined are left out of the scatter.
G2Estimate g2_from_counts(std::span<const PulseTrainResult> runs, Channel ch);
G2Estimate g2_from_counts(const PulseTrainResult& result, Channel ch);

/// N_i N_s / N_p.
double accidental_rate(double n_idler, double n_signal, double n_pulses);

/// Herald coincidences with the channel divided by the accidental
/// expectation, channel counts being "A or B". Throws InsufficientStatistics
/// when no accidentals are expected.
double car(const PulseTrainResult& result, Channel ch);

/// Channel singles rate (N_A + N_B) / N_p.
double channel_rate(const PulseTrainResult& result, Channel ch);

/// 1 - (R_on - noise) / R_off on the untranslated channel.
double depletion_efficiency(const PulseTrainResult& on, const PulseTrainResult& off,
                            double noise_baseline_rate);

/// (R_on(s2) - noise) / R_off(s1) / detector_ratio, where detector_ratio is
/// eta(s2 detectors) / eta(s1 detectors).
double creation_efficiency(const PulseTrainResult& on, const PulseTrainResult& off,
                           double noise_baseline_rate, double detector_ratio);

struct EfficiencyRun {
  PulseTrainResult on, off, noise;
  double depletion = 0.0;
  double creation = 0.0;
};

struct EfficiencyEstimate {
  std::vector<EfficiencyRun> runs;
  double depletion = 0.0;
  double depletion_std_error = 0.0;
  double creation = 0.0;
  double creation_std_error = 0.0;
  int n_runs = 0;
};

/// The on/off/noise protocol repeated over n_runs runs. Within a run the
/// pumps-on, pumps-off and noise-only trains share random numbers; the
/// estimate uses the merged rates and the errors the per-run scatter.
EfficiencyEstimate measure_efficiency(const Experiment& experiment, std::uint64_t pulses_per_run,
                                      int n_runs, std::uint64_t seed, double detector_ratio,
                                      unsigned threads = 0);

// --- exact expectations ----------------------------------------------------

/// Expected per-pulse probabilities of every tallied event, computed in
/// closed form from the pair generating function and inclusion-exclusion
/// over detector sets. With decorrelated = true the herald is treated as
/// independent of the signal channels, as after shuffle_herald.
struct ExpectedChannel {
  double a = 0, b = 0, ab = 0, ac = 0, bc = 0, abc = 0, any = 0, any_c = 0;
};

struct ExpectedTallies {
  double c = 0.0;
  ExpectedChannel untranslated;
  ExpectedChannel translated;

  const ExpectedChannel& channel(Channel ch) const {
    return ch == Channel::untranslated ? untranslated : translated;
  }
  double g2(Channel ch) const;
  double car(Channel ch) const;
  double channel_rate(Channel ch) const;
};

ExpectedTallies expected_tallies(const Experiment& experiment, bool decorrelated = false);

// --- calibration -----------------------------------------------------------

/// Fraction of channel counts caused by background photons:
/// (R - R_without_noise) / R, with R the expected channel singles rate.
double noise_fraction(const Experiment& experiment, Channel ch);

/// Background means reproducing the given noise fractions (each in [0, 1)).
NoiseSpec calibrate_noise(const Experiment& experiment, double untranslated_fraction,
                          double translated_fraction);

struct CalibrationTargets {
  double untranslated_noise_fraction = 0.11;
  double translated_noise_fraction = 0.24;
  double untranslated_car = 8.2;
};

/// Solves epsilon so that the untranslated CAR hits its target, re-solving
/// the backgrounds for the noise fractions at every trial epsilon. Only
/// epsilon and the noise means of the template are changed. Throws
/// std::domain_error when the target CAR is out of reach.
Experiment calibrate_experiment(const Experiment& experiment, const CalibrationTargets& targets);

}  // namespace qft::counting
