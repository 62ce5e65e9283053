#include <doctest.h>

#include <array>
#include <cmath>

#include "qft/dispersion.hpp"
#include "qft/presets.hpp"
#include "qft/units.hpp"

using namespace qft;
using namespace qft::dispersion;

namespace {

// Pure beta2 fiber: the MI detuning is sqrt(2 gamma P / |beta2|) exactly.
FiberSpec quadratic_fiber() {
  FiberSpec f;
  f.name = "quadratic";
  f.reference_wavelength_nm = 1000.0;
  f.beta2_ps2_per_km = -10.0;
  f.gamma_per_w_km = 100.0;
  f.length_m = 1.0;
  f.min_wavelength_nm = 800.0;
  f.max_wavelength_nm = 1300.0;
  return f;
}

double quadratic_detuning(const FiberSpec& f, double power_w) {
  return std::sqrt(2.0 * units::gamma_si(f.gamma_per_w_km) * power_w /
                   std::abs(units::beta_si(f.beta2_ps2_per_km, 2)));
}

RootOptions tight() {
  RootOptions o;
  o.tolerance_mhz = 0.01;
  return o;
}

}  // namespace

TEST_CASE("quadratic fiber MI detuning matches the closed form") {
  const auto f = quadratic_fiber();
  for (double power : {2.0, 10.0, 40.0}) {
    for (double pump : {950.0, 1000.0, 1064.0}) {
      const auto sol = solve_mi_sidebands(f, pump, power, kAllFast, tight());
      const double detuning = sol.quartet.signal() - sol.quartet.pump();
      CHECK(detuning / quadratic_detuning(f, power) == doctest::Approx(1.0).epsilon(1e-6));
      CHECK(sol.quartet.pump() - sol.quartet.idler() == doctest::Approx(detuning).epsilon(1e-12));
    }
  }
}

TEST_CASE("beta0 and beta1 do not move the MI root") {
  const auto f = quadratic_fiber();
  const double pump = units::omega_from_nm(1000.0);
  const double phase = 2.0 * units::gamma_si(f.gamma_per_w_km) * 10.0;
  const double max_detuning = 0.2 * pump;
  PropagationModel plain = [&](double w, Axis a) { return beta(f, w, a); };
  PropagationModel shifted = [&](double w, Axis a) {
    return beta(f, w, a) + 5.0e6 + 4.9e-9 * (w - 1.7e15);
  };
  const auto s0 = solve_mi_sidebands(plain, pump, phase, max_detuning, kAllFast, tight());
  const auto s1 = solve_mi_sidebands(shifted, pump, phase, max_detuning, kAllFast, tight());
  CHECK(s1.quartet.signal() == doctest::Approx(s0.quartet.signal()).epsilon(1e-12));
}

TEST_CASE("fiber1 reproduces the measured sidebands with the pump on the slow axis") {
  const auto f = presets::fiber1();
  const auto sol = solve_mi_sidebands(f, 808.0, 0.0, presets::fiber1_axes());
  CHECK(units::nm_from_omega(sol.quartet.signal()) == doctest::Approx(683.0).epsilon(3.0 / 683.0));
  CHECK(units::nm_from_omega(sol.quartet.idler()) == doctest::Approx(989.0).epsilon(3.0 / 989.0));
  CHECK(sol.quartet.energy_mismatch_relative() < 1e-12);
  CHECK(std::abs(sol.residual_mismatch_per_m) <= sol.tolerance_per_m + 1e-9);
}

TEST_CASE("zdw pinning zeroes the GVD") {
  const auto f = presets::fiber1();
  CHECK(std::abs(gvd(f, units::omega_from_nm(*f.zdw_wavelength_nm))) < 1e-35);
  CHECK(gvd(f, units::omega_from_nm(850.0)) < 0.0);
  CHECK(gvd(f, units::omega_from_nm(750.0)) > 0.0);
}

TEST_CASE("birefringence acts on the slow axis only") {
  auto f = presets::fiber1();
  const double w = units::omega_from_nm(808.0);
  const double expected = f.birefringence_dn * w / units::speed_of_light;
  CHECK(beta(f, w, Axis::slow) - beta(f, w, Axis::fast) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("normal-dispersion pump without birefringence has no MI root") {
  auto f = presets::fiber1();
  CHECK_THROWS_AS(solve_mi_sidebands(f, 780.0, 0.0, kAllFast), NoPhaseMatch);
}

TEST_CASE("beta outside the fiber window throws") {
  const auto f = presets::fiber1();
  CHECK_THROWS_AS(beta(f, units::omega_from_nm(1400.0), Axis::fast), std::domain_error);
  CHECK_THROWS_AS(beta(f, units::omega_from_nm(450.0), Axis::fast), std::domain_error);
  CHECK_NOTHROW(beta(f, units::omega_from_nm(900.0), Axis::fast));
}

TEST_CASE("fiber validation") {
  auto f = presets::fiber2();
  CHECK_NOTHROW(f.validate());
  f.length_m = 0.0;
  CHECK_THROWS_AS(f.validate(), std::invalid_argument);
  f = presets::fiber2();
  f.beta2_ps2_per_km += 1.0;
  CHECK_THROWS_AS(f.validate(), std::invalid_argument);
}

TEST_CASE("bs quartets: energy and residual") {
  const auto q = FrequencyQuartet::bs_translated(808.0, 683.0, 845.0);
  CHECK(q.energy_mismatch_relative() < 1e-15);
  const auto sol = solve_bs_residual(presets::fiber2(), q);
  CHECK(std::abs(sol.residual_mismatch_per_m) < 1e-9);

  // Whole-nm wavelengths are off by a few 1e-4.
  const auto rounded = FrequencyQuartet::bs_from_nm(808.0, 683.0, 659.0, 845.0);
  CHECK(rounded.energy_mismatch_relative() > 1e-4);
  CHECK(rounded.energy_mismatch_relative() < 1e-3);

  const auto broken = FrequencyQuartet::bs_from_nm(808.0, 683.0, 640.0, 845.0);
  CHECK_THROWS_AS(solve_bs_residual(presets::fiber2(), broken), InvalidQuartet);
  CHECK_THROWS_AS(solve_bs_residual(presets::fiber2(), FrequencyQuartet::mi(1e15, 1.1e15, 0.9e15)),
                  InvalidQuartet);
}

TEST_CASE("fit recovers beta4 from synthetic sidebands") {
  auto truth = presets::fiber1();
  truth.beta4_ps4_per_km = 2.3e-4;
  truth = pin_beta2_to_zdw(truth);
  std::array<SidebandPoint, 3> points{};
  const std::array<double, 3> pumps{802.0, 808.0, 815.0};
  for (std::size_t i = 0; i < pumps.size(); ++i) {
    const auto s = solve_mi_sidebands(truth, pumps[i], 0.0, presets::fiber1_axes(), tight());
    points[i] = {pumps[i], units::nm_from_omega(s.quartet.signal()),
                 units::nm_from_omega(s.quartet.idler())};
  }
  auto start = truth;
  start.beta4_ps4_per_km = 1.0e-4;
  FitOptions opt;
  opt.fit_beta3 = false;
  opt.fit_beta4 = true;
  opt.fit_dn = false;
  opt.axes = presets::fiber1_axes();
  const auto fit = fit_fiber_to_points(points, start, opt);
  CHECK(fit.fiber.beta4_ps4_per_km == doctest::Approx(2.3e-4).epsilon(0.01));
  CHECK(fit.rms_residual_nm < 0.01);
  CHECK(sideband_rms_nm(fit.fiber, points, presets::fiber1_axes()) == doctest::Approx(fit.rms_residual_nm));
}

TEST_CASE("beta vanishes at the expansion point on the fast axis") {
  const auto f = presets::fiber1();
  CHECK(beta(f, units::omega_from_nm(f.reference_wavelength_nm), Axis::fast) == 0.0);
}

TEST_CASE("808/683/989 conserve energy to five figures") {
  CHECK(2.0 / 808.0 == doctest::Approx(1.0 / 683.0 + 1.0 / 989.0).epsilon(1e-5));
}

TEST_CASE("sidebands are ordered signal > pump > idler in frequency") {
  const auto f = presets::fiber1();
  for (double pump : {800.0, 808.0, 820.0}) {
    const auto s = solve_mi_sidebands(f, pump, 0.0, presets::fiber1_axes());
    CHECK(s.quartet.signal() > s.quartet.pump());
    CHECK(s.quartet.pump() > s.quartet.idler());
    CHECK(s.quartet.energy_mismatch_relative() < 1e-9);
  }
}

TEST_CASE("bs residual: degenerate quartet and quadratic closed form") {
  const auto f2 = presets::fiber2();
  const double p = units::omega_from_nm(808.0), s = units::omega_from_nm(683.0);
  CHECK(solve_bs_residual(f2, FrequencyQuartet::bs(p, s, s, p)).residual_mismatch_per_m == 0.0);

  const auto f = quadratic_fiber();
  const auto q = FrequencyQuartet::bs_translated(1000.0, 900.0, 1050.0);
  const double ref = units::omega_from_nm(f.reference_wavelength_nm);
  auto sq = [ref](double w) { return (w - ref) * (w - ref); };
  const double expected = units::beta_si(f.beta2_ps2_per_km, 2) *
                          (sq(q.signal1()) + sq(q.pump1()) - sq(q.signal2()) - sq(q.pump2())) / 2.0;
  CHECK(solve_bs_residual(f, q).residual_mismatch_per_m == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("single measured point is interpolated with two free coefficients") {
  auto start = presets::fiber1();
  start.beta4_ps4_per_km = 1e-4;
  start = pin_beta2_to_zdw(start);
  FitOptions opt;
  opt.fit_beta3 = false;
  opt.fit_beta4 = true;
  opt.fit_dn = true;
  opt.axes = presets::fiber1_axes();
  const auto fit = fit_fiber_to_points(presets::fiber1_sidebands(), start, opt);
  CHECK(fit.rms_residual_nm < 0.5);
  CHECK(fit.fiber.birefringence_dn >= 0.0);
  CHECK_THROWS(fit_fiber_to_points(std::span<const SidebandPoint>{}, start, opt));
}
