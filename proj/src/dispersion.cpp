#include "qft/dispersion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include <boost/math/tools/roots.hpp>
#include <fmt/format.h>

#include "qft/units.hpp"

namespace qft::dispersion {

namespace {

struct SiCoefficients {
  double beta2, beta3, beta4;
};

SiCoefficients si(const FiberSpec& fiber) {
  return {units::beta_si(fiber.beta2_ps2_per_km, 2), units::beta_si(fiber.beta3_ps3_per_km, 3),
          units::beta_si(fiber.beta4_ps4_per_km, 4)};
}

double slow_offset(const FiberSpec& fiber, double omega, Axis axis) {
  return axis == Axis::slow ? fiber.birefringence_dn * omega / units::speed_of_light : 0.0;
}

void require_window(const FiberSpec& fiber, double omega) {
  if (!in_window(fiber, omega)) {
    throw std::domain_error(fmt::format(
        "{}: {:.3f} nm is outside the dispersion model window [{}, {}] nm", fiber.name,
        units::nm_from_omega(omega), fiber.min_wavelength_nm, fiber.max_wavelength_nm));
  }
}

}  // namespace

void FiberSpec::validate() const {
  if (!(length_m > 0.0)) throw std::invalid_argument(name + ": length_m must be > 0");
  if (!(gamma_per_w_km >= 0.0)) throw std::invalid_argument(name + ": gamma must be >= 0");
  if (!(birefringence_dn >= 0.0)) {
    throw std::invalid_argument(name + ": birefringence_dn must be >= 0");
  }
  if (!(min_wavelength_nm > 0.0 && max_wavelength_nm > min_wavelength_nm)) {
    throw std::invalid_argument(name + ": invalid wavelength window");
  }
  if (!(reference_wavelength_nm > 0.0)) {
    throw std::invalid_argument(name + ": reference wavelength must be > 0");
  }
  if (zdw_wavelength_nm) {
    // Compare beta2(ZDW) against the size of the terms that cancel in it.
    const double offset = (units::omega_from_nm(*zdw_wavelength_nm) -
                           units::omega_from_nm(reference_wavelength_nm)) * 1e-12;  // rad/ps
    const double linear = beta3_ps3_per_km * offset;
    const double quadratic = 0.5 * beta4_ps4_per_km * offset * offset;
    const double scale = std::max({std::abs(beta2_ps2_per_km), std::abs(linear),
                                   std::abs(quadratic), 1e-300});
    const double at_zdw = beta2_ps2_per_km + linear + quadratic;
    if (std::abs(at_zdw) > 1e-9 * scale) {
      throw std::invalid_argument(
          fmt::format("{}: beta2 at the ZDW is {:.3e} ps^2/km, expected 0", name, at_zdw));
    }
  }
}

FiberSpec pin_beta2_to_zdw(FiberSpec fiber) {
  if (!fiber.zdw_wavelength_nm) return fiber;
  const double offset = (units::omega_from_nm(*fiber.zdw_wavelength_nm) -
                         units::omega_from_nm(fiber.reference_wavelength_nm)) * 1e-12;
  fiber.beta2_ps2_per_km =
      -fiber.beta3_ps3_per_km * offset - 0.5 * fiber.beta4_ps4_per_km * offset * offset;
  return fiber;
}

bool in_window(const FiberSpec& fiber, double omega) {
  const double nm = units::nm_from_omega(omega);
  return nm >= fiber.min_wavelength_nm && nm <= fiber.max_wavelength_nm;
}

double beta(const FiberSpec& fiber, double omega, Axis axis) {
  require_window(fiber, omega);
  const auto b = si(fiber);
  const double w = omega - units::omega_from_nm(fiber.reference_wavelength_nm);
  const double w2 = w * w;
  return b.beta2 * w2 / 2.0 + b.beta3 * w2 * w / 6.0 + b.beta4 * w2 * w2 / 24.0 +
         slow_offset(fiber, omega, axis);
}

double group_slowness(const FiberSpec& fiber, double omega, Axis axis) {
  require_window(fiber, omega);
  const auto b = si(fiber);
  const double w = omega - units::omega_from_nm(fiber.reference_wavelength_nm);
  const double dn = axis == Axis::slow ? fiber.birefringence_dn / units::speed_of_light : 0.0;
  return b.beta2 * w + b.beta3 * w * w / 2.0 + b.beta4 * w * w * w / 6.0 + dn;
}

double gvd(const FiberSpec& fiber, double omega) {
  const auto b = si(fiber);
  const double w = omega - units::omega_from_nm(fiber.reference_wavelength_nm);
  return b.beta2 + b.beta3 * w + b.beta4 * w * w / 2.0;
}

FrequencyQuartet FrequencyQuartet::mi(double pump, double signal, double idler) {
  if (signal < idler) std::swap(signal, idler);
  return {Process::mi, {pump, pump, signal, idler}};
}

FrequencyQuartet FrequencyQuartet::bs(double pump1, double signal1, double signal2, double pump2) {
  return {Process::bs, {pump1, signal1, signal2, pump2}};
}

FrequencyQuartet FrequencyQuartet::bs_translated(double pump1_nm, double signal1_nm,
                                                 double pump2_nm) {
  const double p1 = units::omega_from_nm(pump1_nm);
  const double s1 = units::omega_from_nm(signal1_nm);
  const double p2 = units::omega_from_nm(pump2_nm);
  return bs(p1, s1, p1 + s1 - p2, p2);
}

FrequencyQuartet FrequencyQuartet::bs_from_nm(double pump1_nm, double signal1_nm,
                                              double signal2_nm, double pump2_nm) {
  return bs(units::omega_from_nm(pump1_nm), units::omega_from_nm(signal1_nm),
            units::omega_from_nm(signal2_nm), units::omega_from_nm(pump2_nm));
}

double FrequencyQuartet::energy_mismatch_relative() const {
  const double in = omega[0] + omega[1];
  const double out = omega[2] + omega[3];
  return std::abs(in - out) / in;
}

double mi_mismatch(const FiberSpec& fiber, double pump_omega, double detuning_omega,
                   double pump_power_w, AxisAssignment axes) {
  const double nonlinear = 2.0 * units::gamma_si(fiber.gamma_per_w_km) * pump_power_w;
  return beta(fiber, pump_omega, axes[0]) + beta(fiber, pump_omega, axes[1]) -
         beta(fiber, pump_omega + detuning_omega, axes[2]) -
         beta(fiber, pump_omega - detuning_omega, axes[3]) - nonlinear;
}

PhaseMatchSolution solve_mi_sidebands(const FiberSpec& fiber, double pump_wavelength_nm,
                                      double pump_power_w, AxisAssignment axes,
                                      const RootOptions& options) {
  if (!(pump_power_w >= 0.0)) throw std::invalid_argument("pump power must be >= 0");
  const double pump = units::omega_from_nm(pump_wavelength_nm);
  require_window(fiber, pump);
  // Largest detuning that keeps both sidebands inside the window.
  const double max_detuning = std::min(pump - units::omega_from_nm(fiber.max_wavelength_nm),
                                       units::omega_from_nm(fiber.min_wavelength_nm) - pump);
  const PropagationModel model = [&fiber](double omega, Axis axis) {
    return beta(fiber, omega, axis);
  };
  const double nonlinear = 2.0 * units::gamma_si(fiber.gamma_per_w_km) * pump_power_w;
  try {
    return solve_mi_sidebands(model, pump, nonlinear, max_detuning, axes, options);
  } catch (const NoPhaseMatch& e) {
    throw NoPhaseMatch(fmt::format("{} (fiber {}, pump {} nm)", e.what(), fiber.name,
                                   pump_wavelength_nm));
  }
}

PhaseMatchSolution solve_mi_sidebands(const PropagationModel& model, double pump_omega,
                                      double nonlinear_phase_per_m, double max_detuning_omega,
                                      AxisAssignment axes, const RootOptions& options) {
  const double lo = units::omega_from_thz(options.min_detuning_thz);
  const double hi = std::min(units::omega_from_thz(options.max_detuning_thz), max_detuning_omega);
  if (!(hi > lo)) throw NoPhaseMatch("detuning bracket is empty");

  const double pump_terms = model(pump_omega, axes[0]) + model(pump_omega, axes[1]);
  auto mismatch = [&](double detuning) {
    return pump_terms - model(pump_omega + detuning, axes[2]) -
           model(pump_omega - detuning, axes[3]) - nonlinear_phase_per_m;
  };

  // Log-spaced scan for the first sign change, then a bracketed refinement.
  const int n = std::max(options.scan_points, 2);
  const double ratio = std::pow(hi / lo, 1.0 / (n - 1));
  double a = lo;
  double fa = mismatch(a);
  double b = a;
  double fb = fa;
  bool bracketed = fa == 0.0;
  for (int i = 1; i < n && !bracketed; ++i) {
    b = (i == n - 1) ? hi : lo * std::pow(ratio, i);
    fb = mismatch(b);
    if (fb == 0.0 || std::signbit(fa) != std::signbit(fb)) {
      bracketed = true;
    } else {
      a = b;
      fa = fb;
    }
  }
  if (!bracketed) {
    throw NoPhaseMatch(fmt::format("no phase-matched detuning in [{:.3g}, {:.4g}] THz",
                                   units::thz_from_omega(lo), units::thz_from_omega(hi)));
  }

  double root = b;
  double slope = 0.0;
  const double tol = units::two_pi * options.tolerance_mhz * 1e6;
  if (fa == 0.0) {
    root = a;
  } else if (fb != 0.0) {
    std::uintmax_t max_iter = 200;
    const auto [left, right] = boost::math::tools::toms748_solve(
        mismatch, a, b, fa, fb, [tol](double x, double y) { return std::abs(y - x) <= tol; },
        max_iter);
    root = 0.5 * (left + right);
    if (right > left) slope = (mismatch(right) - mismatch(left)) / (right - left);
  }
  if (slope == 0.0) {
    const double h = std::max(tol, root * 1e-9);
    slope = (mismatch(root + h) - mismatch(root - h)) / (2.0 * h);
  }

  PhaseMatchSolution solution;
  solution.quartet = FrequencyQuartet::mi(pump_omega, pump_omega + root, pump_omega - root);
  solution.residual_mismatch_per_m = mismatch(root);
  solution.tolerance_per_m = std::abs(slope) * tol;
  solution.axes = axes;
  return solution;
}

PhaseMatchSolution solve_bs_residual(const FiberSpec& fiber, const FrequencyQuartet& quartet,
                                     AxisAssignment axes, double energy_tolerance) {
  if (quartet.process != Process::bs) throw InvalidQuartet("solve_bs_residual needs a BS quartet");
  const double violation = quartet.energy_mismatch_relative();
  if (violation > energy_tolerance) {
    throw InvalidQuartet(fmt::format(
        "BS quartet violates energy conservation: relative mismatch {:.3e} > {:.1e}", violation,
        energy_tolerance));
  }
  PhaseMatchSolution solution;
  solution.quartet = quartet;
  solution.axes = axes;
  solution.residual_mismatch_per_m =
      beta(fiber, quartet.pump1(), axes[0]) + beta(fiber, quartet.signal1(), axes[1]) -
      beta(fiber, quartet.signal2(), axes[2]) - beta(fiber, quartet.pump2(), axes[3]);
  solution.tolerance_per_m = 0.0;
  return solution;
}

}  // namespace qft::dispersion
