#include "qft/bs_translator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/tools/roots.hpp>
#include <fmt/format.h>

#include "qft/units.hpp"

namespace qft::translator {

BsCoupler BsCoupler::from_parameters(double delta_per_m, Complex kappa_per_m, double length_m) {
  if (!(length_m > 0.0)) throw std::invalid_argument("coupler length must be > 0");
  BsCoupler c;
  c.delta_per_m = delta_per_m;
  c.kappa_per_m = kappa_per_m;
  c.k_per_m = std::sqrt(std::norm(kappa_per_m) + delta_per_m * delta_per_m);
  c.length_m = length_m;
  return c;
}

BsCoupler BsCoupler::phase_matched(double kappa_length, double length_m) {
  return from_parameters(0.0, Complex(kappa_length / length_m, 0.0), length_m);
}

BsCoupler make_coupler(const dispersion::FiberSpec& fiber, const PumpField& pump1,
                       const PumpField& pump2, const dispersion::FrequencyQuartet& quartet,
                       double overlap, dispersion::AxisAssignment axes) {
  if (!(pump1.power_w >= 0.0 && pump2.power_w >= 0.0)) {
    throw std::invalid_argument("pump powers must be >= 0");
  }
  if (!(overlap >= 0.0 && overlap <= 1.0)) {
    throw std::invalid_argument("overlap factor must be in [0, 1]");
  }
  fiber.validate();
  const auto residual = dispersion::solve_bs_residual(fiber, quartet, axes);
  const double kappa = 2.0 * units::gamma_si(fiber.gamma_per_w_km) *
                       std::sqrt(pump1.power_w * pump2.power_w) * overlap;
  return BsCoupler::from_parameters(0.5 * residual.residual_mismatch_per_m, Complex(kappa, 0.0),
                                    fiber.length_m);
}

TransferMatrix transfer_functions(double delta_per_m, Complex kappa_per_m, double z_m) {
  const double k = std::sqrt(std::norm(kappa_per_m) + delta_per_m * delta_per_m);
  const double sin_over_k = k > 0.0 ? std::sin(k * z_m) / k : z_m;
  const Complex i(0.0, 1.0);
  return {std::cos(k * z_m) + i * delta_per_m * sin_over_k, i * kappa_per_m * sin_over_k};
}

TransferMatrix transfer_at(const BsCoupler& coupler, double z_m) {
  if (!(z_m >= 0.0 && z_m <= coupler.length_m)) {
    throw std::domain_error(
        fmt::format("z = {} m outside the fiber [0, {}] m", z_m, coupler.length_m));
  }
  return transfer_functions(coupler.delta_per_m, coupler.kappa_per_m, z_m);
}

double conversion_efficiency(const BsCoupler& coupler) {
  return transfer_at(coupler, coupler.length_m).efficiency();
}

double kappa_length_for_efficiency(double efficiency) {
  if (!(efficiency >= 0.0 && efficiency <= 1.0)) {
    throw std::domain_error("efficiency must be in [0, 1]");
  }
  return std::asin(std::sqrt(efficiency));
}

// --- spectra ---------------------------------------------------------------

SpectralProfile SpectralProfile::gaussian(double center_nm, double fwhm_nm, double lo_nm,
                                          double hi_nm, int samples) {
  if (samples < 3 || !(hi_nm > lo_nm) || !(fwhm_nm > 0.0)) {
    throw std::invalid_argument("gaussian spectrum: bad grid or width");
  }
  SpectralProfile p;
  p.wavelength_nm.resize(static_cast<std::size_t>(samples));
  p.density.resize(static_cast<std::size_t>(samples));
  const double step = (hi_nm - lo_nm) / (samples - 1);
  const double sigma = fwhm_nm / (2.0 * std::sqrt(2.0 * std::log(2.0)));
  for (int i = 0; i < samples; ++i) {
    const double x = lo_nm + step * i;
    p.wavelength_nm[static_cast<std::size_t>(i)] = x;
    p.density[static_cast<std::size_t>(i)] =
        std::exp(-0.5 * (x - center_nm) * (x - center_nm) / (sigma * sigma));
  }
  return p;
}

void SpectralProfile::validate() const {
  if (wavelength_nm.size() < 2 || wavelength_nm.size() != density.size()) {
    throw std::invalid_argument("spectral profile: grid and density sizes differ or too short");
  }
  const double step = (wavelength_nm.back() - wavelength_nm.front()) /
                      static_cast<double>(wavelength_nm.size() - 1);
  for (std::size_t i = 1; i < wavelength_nm.size(); ++i) {
    const double d = wavelength_nm[i] - wavelength_nm[i - 1];
    if (!(d > 0.0)) throw std::invalid_argument("spectral profile: grid not strictly increasing");
    if (std::abs(d - step) > 1e-6 * step) {
      throw std::invalid_argument("spectral profile: grid is not uniform");
    }
  }
  for (double v : density) {
    if (!(v >= 0.0)) throw std::invalid_argument("spectral profile: negative density");
  }
}

double SpectralProfile::integral() const {
  double sum = 0.0;
  for (std::size_t i = 1; i < density.size(); ++i) {
    sum += 0.5 * (density[i] + density[i - 1]) * (wavelength_nm[i] - wavelength_nm[i - 1]);
  }
  return sum;
}

namespace {

struct HalfMaxCrossings {
  double left_nm, right_nm;
};

HalfMaxCrossings half_max_crossings(const SpectralProfile& p) {
  const auto& y = p.density;
  const auto& x = p.wavelength_nm;
  const auto peak_it = std::max_element(y.begin(), y.end());
  if (peak_it == y.end() || !(*peak_it > 0.0)) throw std::domain_error("FWHM of an empty spectrum");
  const std::size_t peak = static_cast<std::size_t>(peak_it - y.begin());
  const double half = 0.5 * *peak_it;
  std::size_t l = peak;
  while (l > 0 && y[l - 1] >= half) --l;
  std::size_t r = peak;
  while (r + 1 < y.size() && y[r + 1] >= half) ++r;
  if (l == 0 || r + 1 == y.size()) throw std::domain_error("spectrum does not fall to half maximum");
  auto cross = [&](std::size_t below, std::size_t above) {
    return x[below] + (half - y[below]) * (x[above] - x[below]) / (y[above] - y[below]);
  };
  return {cross(l - 1, l), cross(r + 1, r)};
}

}  // namespace

double SpectralProfile::fwhm_nm() const {
  const auto c = half_max_crossings(*this);
  return c.right_nm - c.left_nm;
}

double SpectralProfile::fwhm_thz() const {
  const auto c = half_max_crossings(*this);
  return units::thz_from_omega(units::omega_from_nm(c.left_nm) - units::omega_from_nm(c.right_nm));
}

double SpectralProfile::peak_wavelength_nm() const {
  const auto it = std::max_element(density.begin(), density.end());
  return wavelength_nm[static_cast<std::size_t>(it - density.begin())];
}

double AcceptanceModel::efficiency_at(double detuning_omega) const {
  const double delta = coupler.delta_per_m + 0.5 * walkoff_s_per_m * detuning_omega;
  return transfer_functions(delta, coupler.kappa_per_m, coupler.length_m).efficiency();
}

AcceptanceResult acceptance_filter(const AcceptanceModel& model, const SpectralProfile& input) {
  input.validate();
  const std::size_t n = input.density.size();
  const double center = units::omega_from_nm(model.signal1_nm);

  AcceptanceResult out;
  out.efficiency.resize(n);
  out.translated_input_grid.resize(n);
  out.remainder.wavelength_nm = input.wavelength_nm;
  out.remainder.density.resize(n);
  std::vector<double> shifted_nm(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double omega = units::omega_from_nm(input.wavelength_nm[i]);
    const double eta = model.efficiency_at(omega - center);
    out.efficiency[i] = eta;
    out.translated_input_grid[i] = input.density[i] * eta;
    out.remainder.density[i] = input.density[i] * (1.0 - eta);
    shifted_nm[i] = units::nm_from_omega(omega + model.shift_omega);
  }

  // A constant frequency shift leaves the wavelength grid slightly
  // non-uniform; interpolate back onto a uniform one.
  auto& t = out.translated;
  t.wavelength_nm.resize(n);
  t.density.resize(n);
  const double lo = shifted_nm.front();
  const double step = (shifted_nm.back() - lo) / static_cast<double>(n - 1);
  std::size_t j = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = (i + 1 == n) ? shifted_nm.back() : lo + step * static_cast<double>(i);
    t.wavelength_nm[i] = x;
    while (j + 2 < n && shifted_nm[j + 1] < x) ++j;
    const double x0 = shifted_nm[j];
    const double x1 = shifted_nm[j + 1];
    const double w = std::clamp((x - x0) / (x1 - x0), 0.0, 1.0);
    t.density[i] = (1.0 - w) * out.translated_input_grid[j] + w * out.translated_input_grid[j + 1];
  }
  out.resampled = true;
  return out;
}

double group_slowness_difference(const dispersion::FiberSpec& fiber, double signal1_nm,
                                 double signal2_nm, dispersion::Axis axis) {
  return dispersion::group_slowness(fiber, units::omega_from_nm(signal1_nm), axis) -
         dispersion::group_slowness(fiber, units::omega_from_nm(signal2_nm), axis);
}

double walkoff_for_translated_fwhm(AcceptanceModel model, const SpectralProfile& input,
                                   double target_fwhm_nm) {
  auto width = [&](double walkoff) {
    model.walkoff_s_per_m = walkoff;
    return acceptance_filter(model, input).translated.fwhm_nm();
  };
  const double unfiltered = width(0.0);
  if (!(target_fwhm_nm < unfiltered)) {
    throw std::domain_error(fmt::format(
        "target FWHM {} nm is not below the unfiltered translated width {:.4f} nm",
        target_fwhm_nm, unfiltered));
  }
  // Grow the upper end until the width drops below target.
  double hi = 1e-15;
  while (width(hi) > target_fwhm_nm) {
    hi *= 2.0;
    if (hi > 1e-3) throw std::domain_error("no walk-off reaches the target width");
  }
  const double lo = hi / 2.0;
  std::uintmax_t iterations = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(
      [&](double w) { return width(w) - target_fwhm_nm; }, lo, hi,
      boost::math::tools::eps_tolerance<double>(40), iterations);
  return 0.5 * (a + b);
}

}  // namespace qft::translator
