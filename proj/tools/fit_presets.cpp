// fit_presets: regenerates the fitted fiber coefficients.
//
// Fiber 1: beta4 is fitted so that an 808 nm pump on the slow axis produces
// sidebands at the measured 683/989 nm; beta3, dn and the ZDW stay fixed.
// Fiber 2: the ZDW is placed where the 808/683 -> 845/659 quartet has zero
// phase mismatch on a single axis.
//
//   fit_presets [--write DIR]   prints the coefficients, optionally writes
//                               DIR/fiber1.yaml and DIR/fiber2.yaml

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <boost/math/tools/roots.hpp>
#include <fmt/format.h>

#include "qft/config.hpp"
#include "qft/dispersion.hpp"
#include "qft/presets.hpp"
#include "qft/units.hpp"

namespace {

using namespace qft;

dispersion::FiberSpec fit_fiber1() {
  auto start = presets::fiber1();
  start.beta4_ps4_per_km = 1e-4;
  start = dispersion::pin_beta2_to_zdw(start);
  dispersion::FitOptions opt;
  opt.fit_beta3 = false;
  opt.fit_beta4 = true;
  opt.fit_dn = false;
  opt.axes = presets::fiber1_axes();
  const auto fit = dispersion::fit_fiber_to_points(presets::fiber1_sidebands(), start, opt);
  fmt::print("fiber1: beta4 = {:.7e} ps^4/km, rms = {:.3e} nm, {} evaluations\n",
             fit.fiber.beta4_ps4_per_km, fit.rms_residual_nm, fit.function_evaluations);
  return fit.fiber;
}

dispersion::FiberSpec fit_fiber2() {
  auto fiber = presets::fiber2();
  const auto quartet = dispersion::FrequencyQuartet::bs_translated(808.0, 683.0, 845.0);
  auto mismatch = [&](double zdw) {
    fiber.zdw_wavelength_nm = zdw;
    fiber = dispersion::pin_beta2_to_zdw(fiber);
    return dispersion::solve_bs_residual(fiber, quartet).residual_mismatch_per_m;
  };
  std::uintmax_t iterations = 100;
  const auto [a, b] = boost::math::tools::toms748_solve(
      mismatch, 700.0, 790.0, boost::math::tools::eps_tolerance<double>(30), iterations);
  const double zdw = 0.5 * (a + b);
  mismatch(zdw);
  fmt::print("fiber2: zdw = {:.4f} nm, residual = {:.3e} 1/m, s2 = {:.4f} nm\n", zdw,
             dispersion::solve_bs_residual(fiber, quartet).residual_mismatch_per_m,
             units::nm_from_omega(quartet.signal2()));
  return fiber;
}

void write(const std::string& path, const std::string& comment, const dispersion::FiberSpec& f) {
  std::ofstream out(path);
  out << comment << config::serialize_fiber(f);
  std::cout << "wrote " << path << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fit the built-in fiber presets"};
  std::string dir;
  app.add_option("--write", dir, "directory for the preset YAML files");
  CLI11_PARSE(app, argc, argv);

  try {
    const auto f1 = fit_fiber1();
    const auto f2 = fit_fiber2();
    if (!dir.empty()) {
      const std::string units =
          "# Units: wavelengths in nm, beta_k in ps^k/km (Taylor expansion about\n"
          "# reference_wavelength_nm), gamma in 1/(W km), length in m. beta2 is\n"
          "# pinned so that the GVD vanishes at zdw_wavelength_nm. The model is\n"
          "# used only between min_wavelength_nm and max_wavelength_nm.\n";
      write(dir + "/fiber1.yaml",
            "# Fiber 1: MI pair source. beta4 fitted by fit_presets to the 808 nm pump\n"
            "# sidebands (683, 989 nm) with the pump on the slow axis; beta3 and dn fixed.\n" +
                units,
            f1);
      write(dir + "/fiber2.yaml",
            "# Fiber 2: BS translator. ZDW placed by fit_presets at zero phase mismatch of\n"
            "# the 808/683 -> 845/659 quartet on one axis.\n" +
                units,
            f2);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
