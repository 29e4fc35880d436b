#include "cqed/params.hpp"

#include <cmath>
#include <stdexcept>

#include "cqed/units.hpp"

namespace cqed {

namespace {
void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}
bool finite(double x) { return std::isfinite(x); }
}  // namespace

void validate(const SystemParams& p) {
  require(finite(p.g) && p.g >= 0.0, "SystemParams.g must be finite and >= 0");
  require(finite(p.kappa) && p.kappa > 0.0, "SystemParams.kappa must be finite and > 0");
  require(finite(p.gamma) && p.gamma > 0.0, "SystemParams.gamma must be finite and > 0");
  require(finite(p.delta_a), "SystemParams.delta_a must be finite");
  require(finite(p.delta_c), "SystemParams.delta_c must be finite");
  require(finite(p.omega_drive), "SystemParams.omega_drive must be finite");
}

double cooperativity(const SystemParams& p) {
  return p.g * p.g / (2.0 * p.kappa * p.gamma);
}

double purcell_factor(const SystemParams& p) { return 2.0 * cooperativity(p); }

double collection_efficiency(const SystemParams& p) {
  const double fp = purcell_factor(p);
  return fp / (fp + 1.0);
}

void validate(const CavityGeometry& c) {
  require(finite(c.free_spectral_range) && c.free_spectral_range > 0.0,
          "CavityGeometry.free_spectral_range must be > 0");
  require(finite(c.t_ht) && c.t_ht >= 0.0 && c.t_ht < 1.0, "CavityGeometry.t_ht must be in [0,1)");
  require(finite(c.t_lt) && c.t_lt >= 0.0 && c.t_lt < 1.0, "CavityGeometry.t_lt must be in [0,1)");
  require(finite(c.losses) && c.losses >= 0.0 && c.losses < 1.0,
          "CavityGeometry.losses must be in [0,1)");
  require(c.t_ht + c.t_lt + c.losses > 0.0, "CavityGeometry total round-trip loss must be > 0");
}

double finesse(const CavityGeometry& c) {
  const double total = c.t_ht + c.t_lt + c.losses;
  if (total <= 0.0) throw std::invalid_argument("finesse: zero total round-trip loss");
  return two_pi / total;
}

double kappa_from_geometry(const CavityGeometry& c) {
  return pi * c.free_spectral_range / finesse(c);
}

double eta_ht_from_mirrors(const CavityGeometry& c) {
  const double total = c.t_ht + c.t_lt + c.losses;
  if (total <= 0.0) throw std::invalid_argument("eta_ht_from_mirrors: zero total round-trip loss");
  return c.t_ht / total;
}

void validate(const DetectionChain& d) {
  require(finite(d.eta_ht) && d.eta_ht >= 0.0 && d.eta_ht <= 1.0,
          "DetectionChain.eta_ht must be in [0,1]");
  require(finite(d.eta_c) && d.eta_c >= 0.0 && d.eta_c <= 1.0,
          "DetectionChain.eta_c must be in [0,1]");
  require(finite(d.eta_fs) && d.eta_fs >= 0.0 && d.eta_fs <= 1.0,
          "DetectionChain.eta_fs must be in [0,1]");
  require(finite(d.jitter_sigma) && d.jitter_sigma >= 0.0,
          "DetectionChain.jitter_sigma must be >= 0");
  require(finite(d.tick) && d.tick > 0.0, "DetectionChain.tick must be > 0");
}

}  // namespace cqed
