#pragma once

#include <numbers>

// All rates and frequencies are angular (rad/s) inside the library. Ordinary
// frequencies (MHz, Hz) and inverse-time rates (us^-1) appear only at I/O
// boundaries, through the converters below.
namespace shotnoise::units {

inline constexpr double hbar = 1.054571817e-34;         // J s
inline constexpr double k_boltzmann = 1.380649e-23;     // J / K
inline constexpr double two_pi = 2.0 * std::numbers::pi;

constexpr double mhz_to_rad_per_s(double f_mhz) { return two_pi * f_mhz * 1e6; }
constexpr double rad_per_s_to_mhz(double w) { return w / (two_pi * 1e6); }
constexpr double hz_to_rad_per_s(double f_hz) { return two_pi * f_hz; }
constexpr double rad_per_s_to_hz(double w) { return w / two_pi; }

constexpr double per_us_to_per_s(double r) { return r * 1e6; }
constexpr double per_s_to_per_us(double r) { return r * 1e-6; }

constexpr double us_to_s(double t) { return t * 1e-6; }
constexpr double s_to_us(double t) { return t * 1e6; }
constexpr double ns_to_s(double t) { return t * 1e-9; }

}  // namespace shotnoise::units
