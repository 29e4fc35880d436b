#pragma once

#include <vector>

#include "cqed/analytic.hpp"

namespace cqed {

// Gaussian spread of coupling strengths across trap loads, truncated to
// g >= 0 and renormalized.
struct CouplingDistribution {
  double g_mean = 0.0;   // rad/s
  double g_sigma = 0.0;  // rad/s
  int nodes = 41;
};

void validate(const CouplingDistribution& d);

struct QuadratureRule {
  std::vector<double> g;  // node couplings, all >= 0
  std::vector<double> w;  // weights, sum to 1
};

// Gauss-Hermite rule for the distribution; nodes below zero are dropped and
// the surviving weights renormalized.
QuadratureRule coupling_quadrature(const CouplingDistribution& d);

// Effective coupling of n_at trapped atoms, sqrt(alpha n) g_eff.
double collective_coupling(double n_at, double g_eff, double alpha = 0.12);

// Mean of a Poisson load given the observed empty fraction: -ln(p0).
double poisson_mean_from_zero_fraction(double p0);

// Distribution average of one observable at a single detuning pair; p.g is
// overridden node by node. The rule overload lets scans reuse one quadrature.
double convolved_observable(const QuadratureRule& rule, SystemParams p, Observable obs,
                            double delta_a, double delta_c);
double convolved_observable(const CouplingDistribution& d, SystemParams p, Observable obs,
                            double delta_a, double delta_c);

struct LineshapeOptions {
  double offset = 0.0;             // rigid frequency shift of the curve, rad/s
  bool amplitude_weighted = true;  // false: every node curve rescaled to unit peak
};

// Cavity-output line against probe detuning with atom and cavity
// co-resonant: each grid point x probes delta_a = delta_c = x - offset.
std::vector<double> convolved_lineshape(const CouplingDistribution& d, SystemParams p,
                                        const std::vector<double>& grid,
                                        const LineshapeOptions& opt = {});

}  // namespace cqed
