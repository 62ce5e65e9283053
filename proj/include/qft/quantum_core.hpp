#pragma once

// Truncated Fock-space states of two bosonic modes and the passive two-mode
// map generated by the Bragg-scattering Hamiltonian
//
//   H = delta (n1 - n2) + kappa a1^dag a2 + kappa^* a2^dag a1,
//
// with d/dz a_j = i [a_j, H]. Its Heisenberg solution is
//
//   a1(z) =  mu a1 + nu a2,        mu = cos(kz) + i delta sin(kz) / k
//   a2(z) = -nu^* a1 + mu^* a2,    nu = i kappa sin(kz) / k,  k^2 = |kappa|^2 + delta^2.
//
// Global phases never reach any counting observable in this project.

#include <array>
#include <complex>
#include <stdexcept>
#include <vector>

#include "qft/detector.hpp"

namespace qft::quantum {

using Complex = std::complex<double>;

/// Pure state sum c(n1, n2) |n1, n2>, with 0 <= n1, n2 <= n_max.
class TwoModeFockState {
 public:
  explicit TwoModeFockState(int n_max);

  static TwoModeFockState vacuum(int n_max) { return TwoModeFockState(n_max); }
  static TwoModeFockState fock(int n1, int n2, int n_max);

  int n_max() const noexcept { return n_max_; }

  Complex amplitude(int n1, int n2) const;
  void set_amplitude(int n1, int n2, Complex value);
  double probability(int n1, int n2) const { return std::norm(amplitude(n1, n2)); }

  double norm_squared() const;
  /// Distribution of n1 + n2, indexed by total photon number.
  std::vector<double> total_number_distribution() const;
  /// Marginal photon-number distribution of mode 0 or 1.
  std::vector<double> marginal(int mode) const;
  double mean_photons(int mode) const;

  /// Probability on the truncation edge (n1 == n_max or n2 == n_max).
  double edge_probability() const;
  /// Probability discarded by the constructor that built this state.
  double leaked_probability() const noexcept { return leaked_; }
  void set_leaked_probability(double p) noexcept { leaked_ = p; }

  /// Copy with a different truncation; throws if populated levels would be dropped.
  TwoModeFockState resized(int n_max) const;

 private:
  std::size_t index(int n1, int n2) const;

  int n_max_;
  std::vector<Complex> amplitudes_;
  double leaked_ = 0.0;
};

/// Unitary 2x2 map acting on (a1, a2): [[mu, nu], [-nu^*, mu^*]].
struct ModeOperatorMap {
  std::array<std::array<Complex, 2>, 2> m{};

  double unitarity_error() const;
};

struct TransferMatrix {
  Complex mu{1.0, 0.0};
  Complex nu{0.0, 0.0};

  double efficiency() const { return std::norm(nu); }
  /// | |mu|^2 + |nu|^2 - 1 |
  double unitarity_error() const { return std::abs(std::norm(mu) + std::norm(nu) - 1.0); }
  ModeOperatorMap operator_map() const;
  TransferMatrix inverse() const { return {std::conj(mu), -nu}; }
};

/// Output state of the two-mode passive map. The returned truncation is wide
/// enough to hold every output component, so nothing is lost; total photon
/// number is conserved term by term. Throws std::invalid_argument if the map is
/// not unitary to 1e-10.
TwoModeFockState apply_mode_map(const TwoModeFockState& state, const TransferMatrix& map);

/// |psi> proportional to sum_n eps^n |n, n>, n <= n_max, normalized.
/// leaked_probability() is the untruncated weight beyond n_max, eps^(2(n_max+1)).
/// Throws std::domain_error unless 0 <= eps < 1.
TwoModeFockState two_mode_squeezed_state(double epsilon, int n_max = 10);

struct HeraldedState {
  std::vector<double> distribution;  // P(n_signal | click)
  double click_probability = 0.0;    // unconditional herald click probability

  double mean() const;
  /// Normalized second factorial moment <n(n-1)>/<n>^2.
  double g2() const;
};

class ConditioningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Conditions mode 0 (signal) on a click of `herald` watching mode 1 (idler).
/// Works on the photon-number diagonal; coherences are irrelevant to counting.
HeraldedState heralded_reduce(const TwoModeFockState& state, const DetectorSpec& herald);

}  // namespace qft::quantum
