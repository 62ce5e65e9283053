#include "qft/mi_source.hpp"

#include <cmath>
#include <stdexcept>

#include <boost/math/tools/roots.hpp>
#include <fmt/format.h>

#include "qft/units.hpp"

namespace qft::source {

void SourceSpec::validate() const {
  if (!(epsilon >= 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument(fmt::format("source epsilon {} not in [0, 1)", epsilon));
  }
  if (schmidt_modes < 1) throw std::invalid_argument("schmidt_modes must be >= 1");
  if (!(signal_delivery >= 0.0 && signal_delivery <= 1.0)) {
    throw std::invalid_argument("signal_delivery must be in [0, 1]");
  }
  if (!(rep_rate_hz > 0.0)) throw std::invalid_argument("rep_rate_hz must be > 0");
  herald.validate();
}

double SourceSpec::mean_pairs() const {
  const double e2 = epsilon * epsilon;
  return schmidt_modes * e2 / (1.0 - e2);
}

std::vector<double> SourceSpec::pair_distribution(int n_max) const {
  const double e2 = epsilon * epsilon;
  std::vector<double> p(static_cast<std::size_t>(n_max) + 1, 0.0);
  p[0] = std::pow(1.0 - e2, schmidt_modes);
  for (int n = 0; n < n_max; ++n) {
    p[static_cast<std::size_t>(n) + 1] =
        p[static_cast<std::size_t>(n)] * e2 * (n + schmidt_modes) / (n + 1);
  }
  return p;
}

double SourceSpec::herald_click_probability() const {
  // 1 - (1-d) E[(1-eta)^n] with the negative-binomial generating function.
  const double e2 = epsilon * epsilon;
  const double z = 1.0 - herald.efficiency;
  const double generating = std::pow((1.0 - e2) / (1.0 - e2 * z), schmidt_modes);
  return 1.0 - (1.0 - herald.dark_prob) * generating;
}

EpsilonEstimate epsilon_from_pump(const dispersion::FiberSpec& fiber, double pump_power_w) {
  if (!(pump_power_w >= 0.0)) throw std::invalid_argument("pump power must be >= 0");
  EpsilonEstimate out;
  out.gain = units::gamma_si(fiber.gamma_per_w_km) * pump_power_w * fiber.length_m;
  out.epsilon = out.gain;
  if (out.gain >= 0.5) {
    out.regime_valid = false;
    out.warning = fmt::format(
        "gamma*P*L = {:.3f} >= 0.5: the low-gain pair expansion does not hold", out.gain);
  }
  return out;
}

PulseSampler::PulseSampler(const SourceSpec& spec) : spec_(spec) {
  spec_.validate();
  pairs_ = DiscreteSampler::negative_binomial(spec_.schmidt_modes,
                                              1.0 - spec_.epsilon * spec_.epsilon);
}

PulseRecord PulseSampler::emit(std::uint64_t seed, std::uint32_t run, std::uint64_t pulse) const {
  const auto u = block_uniforms(seed, pulse, stream_tag(run, static_cast<std::uint32_t>(Stage::fixed)), 0);
  return emit(u[0], u[1], seed, run, pulse);
}

PulseRecord PulseSampler::emit(double pair_uniform, double herald_uniform, std::uint64_t seed,
                               std::uint32_t run, std::uint64_t pulse) const {
  PulseRecord rec;
  rec.pairs = pairs_(pair_uniform);
  rec.herald_click = herald_uniform < spec_.herald.click_probability(rec.pairs);
  if (rec.pairs > 0) {
    CounterStream s(seed, pulse, stream_tag(run, static_cast<std::uint32_t>(Stage::delivery)));
    rec.signal_photons = binomial_thin(rec.pairs, spec_.signal_delivery, s);
  }
  return rec;
}

PulseRecord emit_pulse(const SourceSpec& spec, std::uint64_t seed, std::uint32_t run,
                       std::uint64_t pulse) {
  return PulseSampler(spec).emit(seed, run, pulse);
}

double calibrate_epsilon_for_herald_rate(SourceSpec spec, double target_rate_hz) {
  spec.validate();
  const double target = target_rate_hz / spec.rep_rate_hz;
  auto rate_error = [&](double eps) {
    spec.epsilon = eps;
    return spec.herald_click_probability() - target;
  };
  const double lo = 0.0;
  const double hi = 1.0 - 1e-12;
  const double f_lo = rate_error(lo);
  const double f_hi = rate_error(hi);
  if (f_lo > 0.0 || f_hi < 0.0) {
    throw std::domain_error(fmt::format("herald rate {} Hz unreachable for eps in [0, 1)",
                                        target_rate_hz));
  }
  if (f_lo == 0.0) return 0.0;
  std::uintmax_t iterations = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(
      rate_error, lo, hi, f_lo, f_hi, boost::math::tools::eps_tolerance<double>(50), iterations);
  return 0.5 * (a + b);
}

}  // namespace qft::source
