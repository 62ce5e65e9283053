#pragma once

// Fiber propagation constants and the energy-conservation / phase-matching
// solvers for modulation instability (MI) and Bragg scattering (BS).
//
// Convention: beta() is relative. The expansion is
//
//   beta(w) = sum_{k=2..4} beta_k (w - w_ref)^k / k!   (+ dn * w / c on the slow axis)
//
// The constant and linear (group delay) Taylor terms are dropped: every
// quantity computed here is a combination of betas whose frequencies satisfy
// energy conservation, and for such combinations both terms cancel
// identically. Only the slow-axis offset survives, because it is attached to
// specific modes rather than to all of them.

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qft::dispersion {

enum class Axis { fast, slow };

/// Fiber description in the units of the preset files.
///
/// The Taylor model is trusted only for wavelengths inside
/// [min_wavelength_nm, max_wavelength_nm]; beta() throws std::domain_error
/// outside that window.
struct FiberSpec {
  std::string name;
  double reference_wavelength_nm = 800.0;  // Taylor expansion point
  std::optional<double> zdw_wavelength_nm;  // zero-dispersion wavelength, if the fiber has one
  double beta2_ps2_per_km = 0.0;
  double beta3_ps3_per_km = 0.0;
  double beta4_ps4_per_km = 0.0;
  double birefringence_dn = 0.0;
  double gamma_per_w_km = 0.0;
  double length_m = 1.0;
  double min_wavelength_nm = 400.0;
  double max_wavelength_nm = 2000.0;

  /// Throws std::invalid_argument when an invariant fails (length > 0,
  /// gamma >= 0, dn >= 0, a sane window, beta2 vanishing at the ZDW).
  void validate() const;

  bool operator==(const FiberSpec&) const = default;
};

/// Returns a copy whose beta2 is set so that the GVD vanishes at the ZDW.
FiberSpec pin_beta2_to_zdw(FiberSpec fiber);

/// Relative propagation constant (1/m); see the header comment.
double beta(const FiberSpec& fiber, double omega, Axis axis);
/// d(beta)/d(omega) without the dropped constant group delay (s/m).
double group_slowness(const FiberSpec& fiber, double omega, Axis axis);
/// Group-velocity dispersion d^2(beta)/d(omega)^2 (s^2/m).
double gvd(const FiberSpec& fiber, double omega);

bool in_window(const FiberSpec& fiber, double omega);

enum class Process { mi, bs };

/// Four angular frequencies (rad/s). For BS the roles are {p1, s1, s2, p2};
/// for MI they are {p, p, s, i}.
struct FrequencyQuartet {
  Process process = Process::bs;
  std::array<double, 4> omega{};

  static FrequencyQuartet mi(double pump, double signal, double idler);
  static FrequencyQuartet bs(double pump1, double signal1, double signal2, double pump2);
  /// BS quartet with s2 placed exactly at w_p1 + w_s1 - w_p2.
  static FrequencyQuartet bs_translated(double pump1_nm, double signal1_nm, double pump2_nm);
  static FrequencyQuartet bs_from_nm(double pump1_nm, double signal1_nm, double signal2_nm,
                                     double pump2_nm);

  /// |in - out| / in, where in/out are the annihilated/created frequency sums.
  double energy_mismatch_relative() const;

  double pump() const { return omega[0]; }
  double signal() const { return omega[process == Process::mi ? 2 : 1]; }
  double idler() const { return omega[3]; }
  double pump1() const { return omega[0]; }
  double signal1() const { return omega[1]; }
  double signal2() const { return omega[2]; }
  double pump2() const { return omega[3]; }
};

/// Polarization axis of each quartet role, in quartet order.
using AxisAssignment = std::array<Axis, 4>;

inline constexpr AxisAssignment kAllFast{Axis::fast, Axis::fast, Axis::fast, Axis::fast};

/// MI assignment from per-field axes (the pump occupies two slots).
inline constexpr AxisAssignment mi_axes(Axis pump, Axis signal, Axis idler) {
  return {pump, pump, signal, idler};
}

struct PhaseMatchSolution {
  FrequencyQuartet quartet;
  double residual_mismatch_per_m = 0.0;
  double tolerance_per_m = 0.0;
  AxisAssignment axes = kAllFast;
};

class NoPhaseMatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidQuartet : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RootOptions {
  double min_detuning_thz = 0.1;   // bracket, in ordinary frequency
  double max_detuning_thz = 400.0;
  double tolerance_mhz = 1.0;
  int scan_points = 4000;
};

/// beta as a callable, so solvers can be driven by models other than FiberSpec.
using PropagationModel = std::function<double(double omega, Axis axis)>;

/// MI sidebands for a pump at pump_wavelength_nm.
///
/// Solves f(D) = 2 beta_p - beta(w_p + D) - beta(w_p - D) - 2 gamma P = 0 for
/// the smallest detuning D inside the bracket (clipped to the fiber window).
/// The 2 gamma P self-phase term is negligible at mW pump powers but is what
/// makes a purely quadratic fiber phase-matchable.
PhaseMatchSolution solve_mi_sidebands(const FiberSpec& fiber, double pump_wavelength_nm,
                                      double pump_power_w,
                                      AxisAssignment axes = kAllFast,
                                      const RootOptions& options = {});

PhaseMatchSolution solve_mi_sidebands(const PropagationModel& model, double pump_omega,
                                      double nonlinear_phase_per_m, double max_detuning_omega,
                                      AxisAssignment axes = kAllFast,
                                      const RootOptions& options = {});

/// MI mismatch 2 beta_p - beta_s - beta_i - 2 gamma P at detuning D (rad/s).
double mi_mismatch(const FiberSpec& fiber, double pump_omega, double detuning_omega,
                   double pump_power_w, AxisAssignment axes = kAllFast);

/// BS residual beta_p1 + beta_s1 - beta_s2 - beta_p2 (1/m). Does not force it
/// to zero; the residual sets the mismatch of the translator.
///
/// Throws InvalidQuartet when the quartet violates energy conservation by
/// more than energy_tolerance (relative). The default accepts quartets
/// written with whole-nm wavelengths.
PhaseMatchSolution solve_bs_residual(const FiberSpec& fiber, const FrequencyQuartet& quartet,
                                     AxisAssignment axes = kAllFast,
                                     double energy_tolerance = 1e-3);

// --- fitting -------------------------------------------------------------

struct SidebandPoint {
  double pump_nm = 0.0;
  double signal_nm = 0.0;
  double idler_nm = 0.0;
};

/// Which coefficients the fit may move. Without the self-phase term the
/// phase-matching roots are unchanged when beta3, beta4 and dn are scaled by a
/// common factor, so freeing all three leaves the overall scale to the
/// initial guess.
struct FitOptions {
  bool fit_beta3 = false;
  bool fit_beta4 = true;
  bool fit_dn = true;
  AxisAssignment axes = kAllFast;
  double pump_power_w = 0.0;
  int max_function_evaluations = 2000;
  /// Convergence is declared when the final RMS error is below this (nm).
  double max_rms_nm = 1.0;
};

struct FitResult {
  FiberSpec fiber;
  double rms_residual_nm = 0.0;
  int function_evaluations = 0;
};

class FitError : public std::runtime_error {
 public:
  FitError(const std::string& what, double final_rms_nm)
      : std::runtime_error(what), final_rms_nm(final_rms_nm) {}
  double final_rms_nm;
};

/// Least-squares fit of the free coefficients so that solve_mi_sidebands
/// reproduces the measured sidebands. beta2 is re-pinned to the ZDW after
/// every update when the initial fiber declares one.
FitResult fit_fiber_to_points(std::span<const SidebandPoint> points, const FiberSpec& initial,
                              const FitOptions& options = {});

/// RMS sideband prediction error (nm) of a fiber against measured points.
double sideband_rms_nm(const FiberSpec& fiber, std::span<const SidebandPoint> points,
                       AxisAssignment axes = kAllFast, double pump_power_w = 0.0);

}  // namespace qft::dispersion
