#pragma once

// Heralded single-photon source: photon pairs from modulation instability in
// Fiber 1, a herald detector on the idler and lossy delivery of the signal.

#include <cstdint>
#include <string>
#include <vector>

#include "qft/detector.hpp"
#include "qft/dispersion.hpp"
#include "qft/random.hpp"

namespace qft::source {

/// Source description. Each of `schmidt_modes` independent modes emits
/// pairs with P(n) = (1 - eps^2) eps^(2n); one mode is the textbook
/// two-mode squeezed vacuum, more modes approximate a pulsed multimode source
/// whose total pair number is negative-binomial.
struct SourceSpec {
  double epsilon = 0.0;
  int schmidt_modes = 1;
  DetectorSpec herald{0.12, 0.0, "herald"};
  double signal_delivery = 1.0;  // transmission of the signal into Fiber 2
  double rep_rate_hz = 76e6;

  void validate() const;
  /// Mean pair number per pulse, K eps^2 / (1 - eps^2).
  double mean_pairs() const;
  /// P(n pairs) for n = 0..n_max.
  std::vector<double> pair_distribution(int n_max) const;
  /// Analytic herald click probability per pulse.
  double herald_click_probability() const;

  bool operator==(const SourceSpec&) const = default;
};

struct EpsilonEstimate {
  double epsilon = 0.0;
  double gain = 0.0;  // gamma P L
  bool regime_valid = true;
  std::string warning;
};

/// eps = gamma P L, the phase-matched low-gain limit. Results with
/// gamma P L >= 0.5 carry a warning instead of throwing.
EpsilonEstimate epsilon_from_pump(const dispersion::FiberSpec& fiber, double pump_power_w);

/// Per-pulse sample. signal_photons counts photons that reached Fiber 2.
struct PulseRecord {
  int pairs = 0;
  int signal_photons = 0;
  bool herald_click = false;
};

/// Stream tags. Draws that happen in every pulse come from fixed slots of the
/// `fixed` stream; variable-length draws get a stream each, so a change in one
/// stage never shifts the random numbers of another.
enum class Stage : std::uint32_t {
  fixed = 1,     // block 0: {pairs, herald, noise s1, noise s2}; block 1: detectors
  delivery = 2,
  routing = 3,
  split_untranslated = 4,
  split_translated = 5,
};

/// Deterministic per-pulse sampler. The same (seed, run, pulse) always yields
/// the same record.
class PulseSampler {
 public:
  explicit PulseSampler(const SourceSpec& spec);

  PulseRecord emit(std::uint64_t seed, std::uint32_t run, std::uint64_t pulse) const;
  /// Same, with the pair and herald uniforms already drawn from the fixed slots.
  PulseRecord emit(double pair_uniform, double herald_uniform, std::uint64_t seed,
                   std::uint32_t run, std::uint64_t pulse) const;
  const SourceSpec& spec() const noexcept { return spec_; }

 private:
  SourceSpec spec_;
  DiscreteSampler pairs_;
};

/// Convenience wrapper around PulseSampler for a single pulse.
PulseRecord emit_pulse(const SourceSpec& spec, std::uint64_t seed, std::uint32_t run,
                       std::uint64_t pulse);

/// Stream tag combining run id and stage.
inline std::uint32_t stream_tag(std::uint32_t run, std::uint32_t stage) {
  return (run << 8) | (stage & 0xFFu);
}

/// Solves for the eps whose herald singles rate (Hz) equals target_rate_hz.
/// Throws std::domain_error if the rate is unreachable for eps in [0, 1).
double calibrate_epsilon_for_herald_rate(SourceSpec spec, double target_rate_hz);

}  // namespace qft::source
