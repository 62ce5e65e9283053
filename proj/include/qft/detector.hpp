#pragma once

#include <cmath>
#include <string>

namespace qft {

/// Gated, non-number-resolving photon counter.
struct DetectorSpec {
  double efficiency = 1.0;  // per-photon detection probability
  double dark_prob = 0.0;   // dark-click probability per gate
  std::string label;

  /// Click probability with n photons in the gate: 1 - (1-d)(1-eta)^n.
  double click_probability(int photons) const {
    return 1.0 - (1.0 - dark_prob) * std::pow(1.0 - efficiency, photons);
  }

  /// Throws std::invalid_argument unless both probabilities are in [0, 1].
  void validate() const;

  bool operator==(const DetectorSpec&) const = default;
};

}  // namespace qft
