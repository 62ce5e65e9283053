#include "qft/presets.hpp"

#include <array>

namespace qft::presets {

using dispersion::Axis;
using dispersion::FiberSpec;

namespace {

constexpr std::array<dispersion::SidebandPoint, 1> kFiber1Sidebands{{{808.0, 683.0, 989.0}}};

}  // namespace

// Values produced by tools/fit_presets; keep presets/*.yaml in step.
FiberSpec fiber1() {
  FiberSpec f;
  f.name = "fiber1";
  f.reference_wavelength_nm = 800.0;
  f.zdw_wavelength_nm = 796.0;
  f.beta3_ps3_per_km = 0.06;
  f.beta4_ps4_per_km = 1.9276912780671123e-4;
  f.birefringence_dn = 1.0e-5;
  f.gamma_per_w_km = 70.0;
  f.length_m = 32.0;
  f.min_wavelength_nm = 500.0;
  f.max_wavelength_nm = 1300.0;
  return dispersion::pin_beta2_to_zdw(f);
}

FiberSpec fiber2() {
  FiberSpec f;
  f.name = "fiber2";
  f.reference_wavelength_nm = 750.0;
  f.zdw_wavelength_nm = 740.2602280348758;
  f.beta3_ps3_per_km = 0.06;
  f.beta4_ps4_per_km = 0.0;
  f.birefringence_dn = 0.0;
  f.gamma_per_w_km = 95.0;
  f.length_m = 20.0;
  f.min_wavelength_nm = 550.0;
  f.max_wavelength_nm = 1100.0;
  return dispersion::pin_beta2_to_zdw(f);
}

dispersion::AxisAssignment fiber1_axes() { return dispersion::mi_axes(Axis::slow, Axis::fast, Axis::fast); }

dispersion::AxisAssignment fiber1_axes_swapped() {
  return dispersion::mi_axes(Axis::fast, Axis::slow, Axis::slow);
}

std::span<const dispersion::SidebandPoint> fiber1_sidebands() { return kFiber1Sidebands; }

std::optional<FiberSpec> find_fiber(std::string_view name) {
  if (name == "fiber1") return fiber1();
  if (name == "fiber2") return fiber2();
  return std::nullopt;
}

std::vector<std::string> fiber_names() { return {"fiber1", "fiber2"}; }

}  // namespace qft::presets
