#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "qft/mi_source.hpp"
#include "qft/presets.hpp"
#include "qft/units.hpp"

using namespace qft;
using namespace qft::source;

namespace {

SourceSpec multimode(double eps, int modes) {
  SourceSpec s;
  s.epsilon = eps;
  s.schmidt_modes = modes;
  s.herald = {0.12, 5e-6, "C"};
  s.signal_delivery = 0.31;
  return s;
}

}  // namespace

TEST_CASE("pair distribution is normalized and has the stated mean") {
  const auto s = multimode(0.3, 10);
  const auto p = s.pair_distribution(200);
  CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-13));
  double mean = 0.0;
  for (std::size_t n = 0; n < p.size(); ++n) mean += static_cast<double>(n) * p[n];
  CHECK(mean == doctest::Approx(s.mean_pairs()).epsilon(1e-12));
  // One mode is thermal: P(n) = (1 - x) x^n.
  const auto thermal = multimode(0.5, 1).pair_distribution(5);
  CHECK(thermal[3] == doctest::Approx(0.75 * std::pow(0.25, 3)));
}

TEST_CASE("low-gain epsilon estimate and its validity warning") {
  const auto f = presets::fiber1();
  const auto low = epsilon_from_pump(f, 0.05);
  CHECK(low.epsilon == doctest::Approx(0.07 * 0.05 * 32.0));
  CHECK(low.regime_valid);
  CHECK(low.warning.empty());
  const auto high = epsilon_from_pump(f, 0.5);
  CHECK_FALSE(high.regime_valid);
  CHECK_FALSE(high.warning.empty());
  CHECK_THROWS_AS(epsilon_from_pump(f, -1.0), std::invalid_argument);
}

TEST_CASE("validation") {
  auto s = multimode(0.1, 1);
  CHECK_NOTHROW(s.validate());
  s.epsilon = 1.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = multimode(0.1, 0);
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = multimode(0.1, 1);
  s.signal_delivery = 1.5;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("pulse sampler is deterministic and matches the analytic rates") {
  const auto s = multimode(0.2, 10);
  const PulseSampler sampler(s);
  CHECK(sampler.emit(7, 0, 123).pairs == emit_pulse(s, 7, 0, 123).pairs);

  const int n = 400000;
  double pairs = 0.0, clicks = 0.0, signal = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto r = sampler.emit(99, 0, static_cast<std::uint64_t>(i));
    CHECK(r.signal_photons <= r.pairs);
    pairs += r.pairs;
    signal += r.signal_photons;
    clicks += r.herald_click ? 1.0 : 0.0;
  }
  const double p = s.herald_click_probability();
  CHECK(std::abs(clicks / n - p) < 4.0 * std::sqrt(p * (1 - p) / n));
  const double x = s.epsilon * s.epsilon;
  const double var = s.schmidt_modes * x / ((1 - x) * (1 - x));
  CHECK(std::abs(pairs / n - s.mean_pairs()) < 4.0 * std::sqrt(var / n));
  CHECK(signal / pairs == doctest::Approx(0.31).epsilon(0.02));
}

TEST_CASE("epsilon calibrated to a herald singles rate") {
  auto s = multimode(0.0, 10);
  const double target_hz = 100e3;
  s.epsilon = calibrate_epsilon_for_herald_rate(s, target_hz);
  CHECK(s.herald_click_probability() * s.rep_rate_hz == doctest::Approx(target_hz).epsilon(1e-10));

  // Sampled rate agrees.
  const PulseSampler sampler(s);
  const int n = 500000;
  int clicks = 0;
  for (int i = 0; i < n; ++i) clicks += sampler.emit(5, 1, static_cast<std::uint64_t>(i)).herald_click;
  const double p = target_hz / s.rep_rate_hz;
  CHECK(std::abs(double(clicks) / n - p) < 4.0 * std::sqrt(p / n));

  CHECK_THROWS_AS(calibrate_epsilon_for_herald_rate(s, 1.0), std::domain_error);  // below dark rate
  CHECK_THROWS_AS(calibrate_epsilon_for_herald_rate(s, 1e9), std::domain_error);
}

TEST_CASE("epsilon convention spot values") {
  auto f = presets::fiber1();
  CHECK(epsilon_from_pump(f, 0.0).epsilon == 0.0);
  const double p = 0.1 / (units::gamma_si(f.gamma_per_w_km) * f.length_m);
  CHECK(epsilon_from_pump(f, p).epsilon == doctest::Approx(0.1));
}

TEST_CASE("no pairs means only dark clicks") {
  SourceSpec s;
  s.herald = {0.5, 0.0, "C"};
  const PulseSampler sampler(s);
  for (std::uint64_t i = 0; i < 10000; ++i) {
    const auto r = sampler.emit(1, 0, i);
    CHECK(r.pairs == 0);
    CHECK_FALSE(r.herald_click);
  }
}

TEST_CASE("ideal herald click probability is the geometric tail") {
  SourceSpec s;
  s.epsilon = 0.1;
  s.herald = {1.0, 0.0, "C"};
  double tail = 0.0;
  for (int n = 1; n < 40; ++n) tail += (1 - 0.01) * std::pow(0.01, n);
  CHECK(s.herald_click_probability() == doctest::Approx(tail).epsilon(1e-14));
}

TEST_CASE("sampled pair numbers follow the single-mode geometric law") {
  SourceSpec s;
  s.epsilon = 0.4;
  const PulseSampler sampler(s);
  const int n = 1'000'000;
  std::vector<int> hist(6, 0);
  for (int i = 0; i < n; ++i) hist[static_cast<std::size_t>(std::min(sampler.emit(4, 2, i).pairs, 5))]++;
  const double x = 0.16;
  for (int k = 0; k < 5; ++k) {
    const double p = (1 - x) * std::pow(x, k);
    CHECK(std::abs(hist[static_cast<std::size_t>(k)] - n * p) < 4 * std::sqrt(n * p * (1 - p)));
  }
}

TEST_CASE("delivery thins the heralded signal by its transmission") {
  auto s = multimode(0.3, 1);
  s.herald = {0.12, 0.0, "C"};
  double lossless_mean = 0.0, delivered = 0.0, clicks = 0.0;
  s.signal_delivery = 0.31;
  const PulseSampler sampler(s);
  for (int i = 0; i < 1'000'000; ++i) {
    const auto r = sampler.emit(6, 0, static_cast<std::uint64_t>(i));
    if (!r.herald_click) continue;
    clicks += 1;
    lossless_mean += r.pairs;
    delivered += r.signal_photons;
  }
  CHECK(delivered / lossless_mean == doctest::Approx(0.31).epsilon(0.02));
  CHECK(clicks > 0);
}
