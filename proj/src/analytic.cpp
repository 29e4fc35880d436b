#include "cqed/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cqed/parallel.hpp"

namespace cqed {

cplx complex_cooperativity(const SystemParams& p) {
  const cplx denom = 2.0 * (cplx(p.kappa, -p.delta_c) * cplx(p.gamma, -p.delta_a));
  return p.g * p.g / denom;
}

double bare_peak_rate(const SystemParams& p) {
  return p.omega_drive * p.omega_drive / (2.0 * p.gamma);
}

double rate_free_space(const SystemParams& p) {
  const double da = p.delta_a / p.gamma;
  const double lorentz = 1.0 / (1.0 + da * da);
  const double denom = std::norm(1.0 + 2.0 * complex_cooperativity(p));
  return bare_peak_rate(p) * lorentz / denom;
}

double rate_cavity(const SystemParams& p) {
  if (p.g == 0.0) return 0.0;  // continuous limit of |C~|^2/C
  const cplx ct = complex_cooperativity(p);
  const double c0 = cooperativity(p);
  const double denom = std::norm(1.0 + 2.0 * ct);
  return p.omega_drive * p.omega_drive / (p.gamma * c0) * std::norm(ct) / denom;
}

double rate_ratio(const SystemParams& p) {
  const double dc = p.delta_c / p.kappa;
  return 2.0 * cooperativity(p) / (1.0 + dc * dc);
}

double purcell_linewidth(const SystemParams& p) {
  return (1.0 + 2.0 * cooperativity(p)) * p.gamma;
}

double rate_enhancement(const SystemParams& p) {
  const double da = p.delta_a / p.gamma;
  return rate_cavity(p) * (1.0 + da * da) / bare_peak_rate(p);
}

double saturation_proxy(const SystemParams& p) {
  const double denom = 1.0 + 2.0 * cooperativity(p);
  const double r = p.omega_drive / (p.gamma * denom);
  return r * r;
}

DressedPair dressed_energies(const SystemParams& p, double omega_a, double omega_c) {
  const cplx a(omega_a, -p.gamma);
  const cplx b(omega_c, -p.kappa);
  const cplx half_sum = 0.5 * (a + b);
  const cplx half_diff = 0.5 * (a - b);
  const cplx root = std::sqrt(half_diff * half_diff + cplx(p.g * p.g, 0.0));
  cplx up = half_sum + root;
  cplx lo = half_sum - root;
  if (up.real() < lo.real()) std::swap(up, lo);
  return {up, lo};
}

std::vector<DressedPair> dressed_energies(const SystemParams& p, double omega_a,
                                          const std::vector<double>& omega_c_scan) {
  std::vector<DressedPair> out;
  out.reserve(omega_c_scan.size());
  for (double wc : omega_c_scan) out.push_back(dressed_energies(p, omega_a, wc));
  return out;
}

double reflection(const SystemParams& p, double eta_ht) {
  if (eta_ht < 0.0 || eta_ht > 1.0) throw std::invalid_argument("reflection: eta_ht must be in [0,1]");
  const cplx lorentz = cplx(p.kappa, -p.delta_c) + p.g * p.g / cplx(p.gamma, -p.delta_a);
  const cplx r = 1.0 - 2.0 * eta_ht * p.kappa / lorentz;
  return std::norm(r);
}

namespace {
std::vector<double> hyperbola(const SystemParams& p, const std::vector<double>& delta_a,
                              double product) {
  std::vector<double> out;
  out.reserve(delta_a.size());
  for (double da : delta_a) {
    if (da == 0.0) throw std::invalid_argument("hyperbola curve undefined at delta_a = 0");
    out.push_back(product / da);
  }
  return out;
}
}  // namespace

std::vector<double> backaction_boundary(const SystemParams& p, const std::vector<double>& delta_a) {
  return hyperbola(p, delta_a, (1.0 + cooperativity(p)) * p.kappa * p.gamma);
}

std::vector<double> dressed_band_curve(const SystemParams& p, const std::vector<double>& delta_a) {
  return hyperbola(p, delta_a, 2.0 * cooperativity(p) * p.kappa * p.gamma);
}

std::string observable_name(Observable o) {
  switch (o) {
    case Observable::cavity_rate: return "cavity_rate";
    case Observable::free_space_rate: return "free_space_rate";
    case Observable::rate_ratio: return "rate_ratio";
    case Observable::enhancement: return "enhancement";
    default: return "reflection";
  }
}

double observable_value(const SystemParams& p, Observable obs, double eta_ht) {
  switch (obs) {
    case Observable::cavity_rate: return rate_cavity(p);
    case Observable::free_space_rate: return rate_free_space(p);
    case Observable::rate_ratio: return rate_ratio(p);
    case Observable::enhancement: return rate_enhancement(p);
    case Observable::reflection: return reflection(p, eta_ht);
  }
  return 0.0;
}

SpectrumScan scan_2d(const SystemParams& p, const std::vector<double>& delta_a,
                     const std::vector<double>& delta_c, Observable obs, bool normalize_to_max,
                     double eta_ht, int threads) {
  if (delta_a.empty() || delta_c.empty()) throw std::invalid_argument("scan_2d: empty grid");
  for (std::size_t i = 1; i < delta_a.size(); ++i)
    if (!(delta_a[i] > delta_a[i - 1])) throw std::invalid_argument("scan_2d: delta_a grid not strictly increasing");
  for (std::size_t j = 1; j < delta_c.size(); ++j)
    if (!(delta_c[j] > delta_c[j - 1])) throw std::invalid_argument("scan_2d: delta_c grid not strictly increasing");

  SpectrumScan s;
  s.delta_a = delta_a;
  s.delta_c = delta_c;
  s.observable = observable_name(obs);
  s.params = p;
  s.values.assign(delta_a.size() * delta_c.size(), 0.0);

  parallel_for(delta_a.size(), threads, [&](std::size_t i) {
    SystemParams q = p;
    q.delta_a = delta_a[i];
    for (std::size_t j = 0; j < delta_c.size(); ++j) {
      q.delta_c = delta_c[j];
      s.values[i * delta_c.size() + j] = observable_value(q, obs, eta_ht);
    }
  });

  if (normalize_to_max) {
    const double mx = *std::max_element(s.values.begin(), s.values.end());
    if (mx > 0.0) {
      for (double& v : s.values) v /= mx;
      s.normalized = true;
    }
  }
  return s;
}

}  // namespace cqed
