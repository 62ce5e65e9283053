#include <cmath>

#include <boost/math/tools/roots.hpp>
#include <fmt/format.h>

#include "qft/counting.hpp"

namespace qft::counting {

namespace {

double& noise_mean(Experiment& e, Channel ch) {
  return ch == Channel::untranslated ? e.noise.untranslated_mean : e.noise.translated_mean;
}

double rate_without_noise(Experiment e, Channel ch) {
  noise_mean(e, ch) = 0.0;
  return expected_tallies(e).channel_rate(ch);
}

template <class F>
double solve_increasing(F f, double lo, double hi) {
  std::uintmax_t iterations = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(
      f, lo, hi, boost::math::tools::eps_tolerance<double>(45), iterations);
  return 0.5 * (a + b);
}

double solve_noise(Experiment e, Channel ch, double fraction) {
  if (!(fraction >= 0.0 && fraction < 1.0)) {
    throw std::domain_error(fmt::format("noise fraction {} not in [0, 1)", fraction));
  }
  noise_mean(e, ch) = 0.0;
  if (fraction == 0.0) return 0.0;
  if (!(rate_without_noise(e, ch) > 0.0)) {
    throw std::domain_error("noise fraction undefined: channel has no other counts");
  }
  auto error = [&](double mean) {
    noise_mean(e, ch) = mean;
    return noise_fraction(e, ch) - fraction;
  };
  double hi = 1e-6;
  while (error(hi) < 0.0) {
    hi *= 4.0;
    if (hi > 1e3) throw std::domain_error("noise fraction unreachable");
  }
  return solve_increasing(error, 0.0, hi);
}

}  // namespace

double noise_fraction(const Experiment& experiment, Channel ch) {
  const double total = expected_tallies(experiment).channel_rate(ch);
  if (!(total > 0.0)) throw std::domain_error("noise fraction undefined: no channel counts");
  return (total - rate_without_noise(experiment, ch)) / total;
}

NoiseSpec calibrate_noise(const Experiment& experiment, double untranslated_fraction,
                          double translated_fraction) {
  return {solve_noise(experiment, Channel::untranslated, untranslated_fraction),
          solve_noise(experiment, Channel::translated, translated_fraction)};
}

Experiment calibrate_experiment(const Experiment& experiment, const CalibrationTargets& targets) {
  Experiment e = experiment;
  auto at = [&](double eps) {
    e.source.epsilon = eps;
    e.noise = calibrate_noise(e, targets.untranslated_noise_fraction,
                              targets.translated_noise_fraction);
    return e;
  };
  auto car_error = [&](double eps) {
    return expected_tallies(at(eps)).car(Channel::untranslated) - targets.untranslated_car;
  };

  // CAR falls as eps grows once multi-pair emission outweighs the darks.
  // Step up from small eps until the target is crossed.
  double lo = 1e-3;
  double f_lo = car_error(lo);
  if (f_lo < 0.0) {
    throw std::domain_error(fmt::format("target CAR {} is above the CAR reached at eps = {}",
                                        targets.untranslated_car, lo));
  }
  double hi = lo;
  double f_hi = f_lo;
  while (f_hi > 0.0) {
    lo = hi;
    f_lo = f_hi;
    hi *= 1.25;
    if (hi > 0.95) {
      throw std::domain_error(
          fmt::format("target CAR {} not reached for eps < 0.95", targets.untranslated_car));
    }
    f_hi = car_error(hi);
  }
  std::uintmax_t iterations = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(
      car_error, lo, hi, f_lo, f_hi, boost::math::tools::eps_tolerance<double>(45), iterations);
  return at(0.5 * (a + b));
}

}  // namespace qft::counting
