#pragma once

#include <vector>

#include "qft/dispersion.hpp"
#include "qft/quantum_core.hpp"

namespace qft::translator {

using quantum::Complex;
using quantum::TransferMatrix;

struct PumpField {
  double wavelength_nm = 0.0;
  double power_w = 0.0;
};

/// Coupled-mode parameters of one Bragg-scattering configuration.
struct BsCoupler {
  double delta_per_m = 0.0;  // phase mismatch
  Complex kappa_per_m{0.0, 0.0};
  double k_per_m = 0.0;  // sqrt(|kappa|^2 + delta^2)
  double length_m = 1.0;

  /// Builds a coupler and fills k. Throws std::invalid_argument for length <= 0.
  static BsCoupler from_parameters(double delta_per_m, Complex kappa_per_m, double length_m);
  /// delta = 0 coupler with |kappa| L = kappa_length.
  static BsCoupler phase_matched(double kappa_length, double length_m);

  double kappa_length() const { return std::abs(kappa_per_m) * length_m; }
};

/// kappa = 2 gamma sqrt(P1 P2) * overlap, delta = (beta_p1 + beta_s1 - beta_s2 - beta_p2) / 2.
/// The factor 2 is the usual coupled-mode convention; overlap in [0, 1] stands
/// in for imperfect temporal overlap of the pulses.
BsCoupler make_coupler(const dispersion::FiberSpec& fiber, const PumpField& pump1,
                       const PumpField& pump2, const dispersion::FrequencyQuartet& quartet,
                       double overlap = 1.0,
                       dispersion::AxisAssignment axes = dispersion::kAllFast);

/// (mu(z), nu(z)) for arbitrary z >= 0, no range check against a fiber length.
TransferMatrix transfer_functions(double delta_per_m, Complex kappa_per_m, double z_m);

/// Transfer functions inside the fiber; throws std::domain_error unless 0 <= z <= length.
TransferMatrix transfer_at(const BsCoupler& coupler, double z_m);

/// |nu(L)|^2, the single-photon translation probability.
double conversion_efficiency(const BsCoupler& coupler);

/// |kappa| L that gives `efficiency` at delta = 0 (asin of its square root).
double kappa_length_for_efficiency(double efficiency);

// --- finite acceptance bandwidth ------------------------------------------

/// Power spectrum on a uniform, strictly increasing wavelength grid.
/// Values are arbitrary units per sample.
struct SpectralProfile {
  std::vector<double> wavelength_nm;
  std::vector<double> density;

  static SpectralProfile gaussian(double center_nm, double fwhm_nm, double lo_nm, double hi_nm,
                                  int samples);

  /// Throws std::invalid_argument unless the grid is uniform, increasing and
  /// the density is non-negative.
  void validate() const;
  /// Trapezoidal integral over wavelength.
  double integral() const;
  /// Full width at half maximum in nm, from linear interpolation of the crossings.
  double fwhm_nm() const;
  /// The same crossings expressed as an optical-frequency width (THz).
  double fwhm_thz() const;
  double peak_wavelength_nm() const;
};

/// Linearized detuning dependence delta(W) = delta0 + walkoff * W / 2, W being
/// the angular-frequency offset from the s1 channel center.
struct AcceptanceModel {
  BsCoupler coupler;
  double walkoff_s_per_m = 0.0;  // group-slowness difference beta1(s1) - beta1(s2)
  double signal1_nm = 0.0;       // s1 channel center
  double shift_omega = 0.0;      // w_s2 - w_s1 = w_p1 - w_p2

  double efficiency_at(double detuning_omega) const;
};

struct AcceptanceResult {
  SpectralProfile translated;                 // on a uniform grid around s2
  SpectralProfile remainder;                  // on the input grid
  std::vector<double> translated_input_grid;  // input * eta, before the shift
  std::vector<double> efficiency;             // eta per input sample
  bool resampled = false;                     // translated values were interpolated
};

/// Splits `input` (around s1) into the translated part, shifted by
/// shift_omega and resampled onto a uniform grid, and the untranslated remainder.
AcceptanceResult acceptance_filter(const AcceptanceModel& model, const SpectralProfile& input);

/// beta1(s1) - beta1(s2) from the fiber model.
double group_slowness_difference(const dispersion::FiberSpec& fiber, double signal1_nm,
                                 double signal2_nm, dispersion::Axis axis = dispersion::Axis::fast);

/// Smallest walk-off magnitude for which the translated FWHM (nm) reaches
/// target_fwhm_nm. The walkoff in `model` is ignored. Throws
/// std::domain_error if the target is at or above the unfiltered width.
double walkoff_for_translated_fwhm(AcceptanceModel model, const SpectralProfile& input,
                                   double target_fwhm_nm);

}  // namespace qft::translator
