#include <cmath>
#include <vector>

#include <Eigen/Core>
#include <fmt/format.h>
#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include "qft/dispersion.hpp"
#include "qft/units.hpp"

namespace qft::dispersion {

namespace {

constexpr double kPenaltyNm = 1e3;

struct Parameterization {
  FiberSpec base;
  FitOptions options;
  std::vector<double FiberSpec::*> fields;
  std::vector<double> scales;
  std::vector<bool> non_negative;

  // Non-negative coefficients are fitted through |x|.
  FiberSpec apply(const Eigen::VectorXd& x) const {
    FiberSpec fiber = base;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      const auto xi = x[static_cast<Eigen::Index>(i)];
      fiber.*fields[i] = (non_negative[i] ? std::abs(xi) : xi) * scales[i];
    }
    return pin_beta2_to_zdw(fiber);
  }
};

// Residual used while optimizing: one Newton step of the MI mismatch taken
// from the measured detuning. It equals the true sideband prediction error to
// first order and, unlike re-solving for the root, is smooth in the
// coefficients.
struct SidebandFunctor {
  using Scalar = double;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;

  const Parameterization* param;
  std::span<const SidebandPoint> points;
  mutable int evaluations = 0;

  int inputs() const { return static_cast<int>(param->fields.size()); }
  int values() const { return static_cast<int>(points.size() * 2); }

  int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& residual) const {
    ++evaluations;
    const FiberSpec fiber = param->apply(x);
    const auto& axes = param->options.axes;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto& pt = points[i];
      double signal_err = kPenaltyNm;
      double idler_err = kPenaltyNm;
      try {
        const double pump = units::omega_from_nm(pt.pump_nm);
        const double detuning =
            0.5 * (units::omega_from_nm(pt.signal_nm) - units::omega_from_nm(pt.idler_nm));
        const double f = mi_mismatch(fiber, pump, detuning, param->options.pump_power_w, axes);
        const double slope = -group_slowness(fiber, pump + detuning, axes[2]) +
                             group_slowness(fiber, pump - detuning, axes[3]);
        if (slope != 0.0 && std::isfinite(f / slope)) {
          const double predicted = detuning - f / slope;
          if (predicted > 0.0 && predicted < pump) {
            signal_err = units::nm_from_omega(pump + predicted) - pt.signal_nm;
            idler_err = units::nm_from_omega(pump - predicted) - pt.idler_nm;
          }
        }
      } catch (const std::domain_error&) {
        // outside the model window: keep the penalty
      }
      residual[2 * i] = signal_err;
      residual[2 * i + 1] = idler_err;
    }
    return 0;
  }
};

}  // namespace

double sideband_rms_nm(const FiberSpec& fiber, std::span<const SidebandPoint> points,
                       AxisAssignment axes, double pump_power_w) {
  if (points.empty()) throw std::invalid_argument("sideband_rms_nm: no points");
  double sum = 0.0;
  for (const auto& pt : points) {
    const auto sol = solve_mi_sidebands(fiber, pt.pump_nm, pump_power_w, axes);
    const double ds = units::nm_from_omega(sol.quartet.signal()) - pt.signal_nm;
    const double di = units::nm_from_omega(sol.quartet.idler()) - pt.idler_nm;
    sum += ds * ds + di * di;
  }
  return std::sqrt(sum / (2.0 * static_cast<double>(points.size())));
}

FitResult fit_fiber_to_points(std::span<const SidebandPoint> points, const FiberSpec& initial,
                              const FitOptions& options) {
  if (points.empty()) throw std::invalid_argument("fit_fiber_to_points: no data points");

  Parameterization param{initial, options, {}, {}, {}};
  auto add = [&](bool enabled, double FiberSpec::*field, double floor, bool non_negative) {
    if (!enabled) return;
    param.fields.push_back(field);
    param.scales.push_back(std::max(std::abs(initial.*field), floor));
    param.non_negative.push_back(non_negative);
  };
  add(options.fit_beta3, &FiberSpec::beta3_ps3_per_km, 1e-2, false);
  add(options.fit_beta4, &FiberSpec::beta4_ps4_per_km, 1e-5, false);
  add(options.fit_dn, &FiberSpec::birefringence_dn, 1e-6, true);
  if (param.fields.empty()) throw std::invalid_argument("fit_fiber_to_points: nothing to fit");
  if (2 * points.size() < param.fields.size()) {
    throw std::invalid_argument("fit_fiber_to_points: fewer residuals than free coefficients");
  }

  Eigen::VectorXd x(static_cast<Eigen::Index>(param.fields.size()));
  for (std::size_t i = 0; i < param.fields.size(); ++i) {
    x[static_cast<Eigen::Index>(i)] = initial.*param.fields[i] / param.scales[i];
  }

  SidebandFunctor functor{&param, points};
  Eigen::NumericalDiff<SidebandFunctor> numdiff(functor);
  Eigen::LevenbergMarquardt<Eigen::NumericalDiff<SidebandFunctor>> lm(numdiff);
  lm.parameters.maxfev = options.max_function_evaluations;
  lm.parameters.xtol = 1e-14;
  lm.parameters.ftol = 1e-14;
  lm.minimize(x);

  FitResult result;
  result.fiber = param.apply(x);
  result.function_evaluations = static_cast<int>(lm.nfev);
  try {
    result.rms_residual_nm = sideband_rms_nm(result.fiber, points, options.axes,
                                             options.pump_power_w);
  } catch (const std::exception& e) {
    Eigen::VectorXd residual(functor.values());
    functor(x, residual);
    const double rms = std::sqrt(residual.squaredNorm() / static_cast<double>(residual.size()));
    throw FitError(fmt::format("fit did not converge: {}", e.what()), rms);
  }
  if (!(result.rms_residual_nm <= options.max_rms_nm)) {
    throw FitError(fmt::format("fit did not converge: RMS sideband error {:.3f} nm",
                               result.rms_residual_nm),
                   result.rms_residual_nm);
  }
  return result;
}

}  // namespace qft::dispersion
