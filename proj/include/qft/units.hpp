#pragma once

#include <cmath>
#include <numbers>

namespace qft::units {

inline constexpr double speed_of_light = 299'792'458.0;  // m/s
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Angular frequency (rad/s) of a vacuum wavelength in nm.
inline double omega_from_nm(double wavelength_nm) {
  return two_pi * speed_of_light / (wavelength_nm * 1e-9);
}

inline double nm_from_omega(double omega) {
  return two_pi * speed_of_light / omega * 1e9;
}

inline double omega_from_thz(double thz) { return two_pi * thz * 1e12; }
inline double thz_from_omega(double omega) { return omega / (two_pi * 1e12); }

/// Taylor coefficient in ps^k/km converted to s^k/m.
inline double beta_si(double value_ps_k_per_km, int order) {
  return value_ps_k_per_km * std::pow(1e-12, order) * 1e-3;
}

inline double beta_ps_km(double value_si, int order) {
  return value_si / (std::pow(1e-12, order) * 1e-3);
}

/// 1/(W km) to 1/(W m).
inline double gamma_si(double gamma_per_w_km) { return gamma_per_w_km * 1e-3; }

}  // namespace qft::units
