#include "cqed/ensemble.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace cqed {

void validate(const CouplingDistribution& d) {
  if (d.g_sigma < 0.0) throw std::invalid_argument("coupling distribution: sigma must be >= 0");
  if (d.nodes < 1) throw std::invalid_argument("coupling distribution: need at least one node");
}

// Golub-Welsch on the Jacobi matrix of the probabilists' Hermite polynomials
// (weight exp(-x^2/2)): nodes are the eigenvalues, weights the squared first
// eigenvector components, which already sum to one.
QuadratureRule coupling_quadrature(const CouplingDistribution& d) {
  validate(d);
  const int n = d.nodes;
  std::vector<double> x(n, 0.0), w(n, 1.0);
  if (n > 1) {
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
      jac(k, k - 1) = std::sqrt(static_cast<double>(k));
      jac(k - 1, k) = jac(k, k - 1);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
    for (int i = 0; i < n; ++i) {
      x[i] = es.eigenvalues()(i);
      const double q0 = es.eigenvectors()(0, i);
      w[i] = q0 * q0;
    }
  }

  QuadratureRule rule;
  double wsum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = d.g_mean + d.g_sigma * x[i];
    if (g < 0.0) continue;
    rule.g.push_back(g);
    rule.w.push_back(w[i]);
    wsum += w[i];
  }
  if (rule.g.empty() || wsum <= 0.0)
    throw std::runtime_error("coupling distribution: no weight at g >= 0");
  for (double& wi : rule.w) wi /= wsum;
  return rule;
}

double collective_coupling(double n_at, double g_eff, double alpha) {
  if (n_at < 0.0) throw std::invalid_argument("collective_coupling: n_at must be >= 0");
  if (alpha < 0.0) throw std::invalid_argument("collective_coupling: alpha must be >= 0");
  return std::sqrt(alpha * n_at) * g_eff;
}

double poisson_mean_from_zero_fraction(double p0) {
  if (!(p0 > 0.0) || p0 > 1.0)
    throw std::invalid_argument("poisson mean: zero fraction must be in (0, 1]");
  return -std::log(p0);
}

double convolved_observable(const QuadratureRule& rule, SystemParams p, Observable obs,
                            double delta_a, double delta_c) {
  p.delta_a = delta_a;
  p.delta_c = delta_c;
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.g.size(); ++i) {
    p.g = rule.g[i];
    acc += rule.w[i] * observable_value(p, obs);
  }
  return acc;
}

double convolved_observable(const CouplingDistribution& d, SystemParams p, Observable obs,
                            double delta_a, double delta_c) {
  return convolved_observable(coupling_quadrature(d), p, obs, delta_a, delta_c);
}

std::vector<double> convolved_lineshape(const CouplingDistribution& d, SystemParams p,
                                        const std::vector<double>& grid,
                                        const LineshapeOptions& opt) {
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1]))
      throw std::invalid_argument("convolved_lineshape: grid not strictly increasing");
  const QuadratureRule rule = coupling_quadrature(d);

  std::vector<double> out(grid.size(), 0.0);
  std::vector<double> node(grid.size(), 0.0);
  for (std::size_t i = 0; i < rule.g.size(); ++i) {
    p.g = rule.g[i];
    double peak = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j) {
      p.delta_a = grid[j] - opt.offset;
      p.delta_c = p.delta_a;
      node[j] = rate_cavity(p);
      peak = std::max(peak, node[j]);
    }
    // unit-peak rescaling drops the per-coupling brightness, leaving a pure
    // shape average
    const double scale = opt.amplitude_weighted ? 1.0 : (peak > 0.0 ? 1.0 / peak : 0.0);
    for (std::size_t j = 0; j < grid.size(); ++j) out[j] += rule.w[i] * scale * node[j];
  }
  return out;
}

}  // namespace cqed
