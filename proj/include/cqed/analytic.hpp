#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "cqed/params.hpp"

namespace cqed {

using cplx = std::complex<double>;

// C~ = g^2 / (2 (kappa - i delta_c)(gamma - i delta_a)). Real and equal to
// cooperativity(p) on two-fold resonance.
cplx complex_cooperativity(const SystemParams& p);

// Bare-atom resonant scattering rate R0 = Omega^2/(2 gamma).
double bare_peak_rate(const SystemParams& p);

// Weak-drive steady-state photon rates (photons/s out of the atom and out of
// the cavity respectively). Validity of the weak-drive assumption is the
// caller's business; see saturation_proxy.
double rate_free_space(const SystemParams& p);
double rate_cavity(const SystemParams& p);

// rate_cavity/rate_free_space = 2C/(1 + delta_c^2/kappa^2), independent of
// delta_a.
double rate_ratio(const SystemParams& p);

// gamma' = (1 + 2C) gamma.
double purcell_linewidth(const SystemParams& p);

// rate_cavity normalized to what the bare atom (no cavity) would scatter at
// the same probe detuning: R_c(da,dc) * (1 + da^2/gamma^2) / R0.
double rate_enhancement(const SystemParams& p);

// s ~ Omega^2 / (gamma^2 (1+2C)^2); keep <= 0.1 for the analytic formulas.
double saturation_proxy(const SystemParams& p);

struct DressedPair {
  cplx upper;  // larger real part
  cplx lower;
};

// Eigenvalues of [[omega_a - i gamma, g], [g, omega_c - i kappa]]: band
// positions (real part) and half-widths (-imag part) of the single-excitation
// dressed states.
DressedPair dressed_energies(const SystemParams& p, double omega_a, double omega_c);
std::vector<DressedPair> dressed_energies(const SystemParams& p, double omega_a,
                                          const std::vector<double>& omega_c_scan);

// One-sided reflection |r|^2, r = 1 - 2 eta_ht kappa / (kappa - i delta_c +
// g^2/(gamma - i delta_a)).
double reflection(const SystemParams& p, double eta_ht);

// Hyperbolas delta_a*delta_c = (1+C) kappa gamma (free-space rate back to R0)
// and delta_a*delta_c = 2C kappa gamma (dressed bands), sampled as delta_c
// values on the given delta_a grid. Zero crossings of delta_a yield infinity;
// callers pass grids excluding 0.
std::vector<double> backaction_boundary(const SystemParams& p, const std::vector<double>& delta_a);
std::vector<double> dressed_band_curve(const SystemParams& p, const std::vector<double>& delta_a);

enum class Observable { cavity_rate, free_space_rate, rate_ratio, enhancement, reflection };

std::string observable_name(Observable o);

// Single-point dispatch over the observables above at the detunings stored in
// p. eta_ht only matters for reflection.
double observable_value(const SystemParams& p, Observable obs, double eta_ht = 1.0);

struct SpectrumScan {
  std::vector<double> delta_a;  // rad/s, strictly increasing
  std::vector<double> delta_c;
  std::vector<double> values;   // row-major, values[i*n_c + j] for (delta_a[i], delta_c[j])
  std::string observable;
  SystemParams params;
  bool normalized = false;

  double at(std::size_t i, std::size_t j) const { return values[i * delta_c.size() + j]; }
};

// Fills the map over the detuning grids; parallel over delta_a rows. eta_ht
// only matters for the reflection observable.
SpectrumScan scan_2d(const SystemParams& p, const std::vector<double>& delta_a,
                     const std::vector<double>& delta_c, Observable obs,
                     bool normalize_to_max = false, double eta_ht = 1.0, int threads = 0);

}  // namespace cqed
