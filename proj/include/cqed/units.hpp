#pragma once

namespace cqed {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;

// All rates and detunings are angular frequencies in rad/s internally.
// User-facing I/O uses value/2pi in MHz throughout.
constexpr double rad_from_mhz(double mhz) { return two_pi * 1e6 * mhz; }
constexpr double mhz_from_rad(double w) { return w / (two_pi * 1e6); }

constexpr double sec_from_ns(double ns) { return ns * 1e-9; }
constexpr double ns_from_sec(double s) { return s * 1e9; }
constexpr double sec_from_ps(double ps) { return ps * 1e-12; }
constexpr double ps_from_sec(double s) { return s * 1e12; }

// Rb87 D2 dipole (field) decay rate. Excited-state lifetime = 1/(2*gamma),
// 26.24 ns, so gamma = 2pi * 3.0326 MHz.
inline constexpr double rb87_d2_lifetime = 26.24e-9;
inline constexpr double rb87_d2_gamma = 1.0 / (2.0 * rb87_d2_lifetime);

// Collective coupling reduction factor, g_eff(N) = sqrt(alpha*N) * g_eff(1).
inline constexpr double default_collective_alpha = 0.12;

}  // namespace cqed
