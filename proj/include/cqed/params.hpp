#pragma once

#include <string>

namespace cqed {

// The two-level CQED parameter set. g, kappa, gamma are field decay/coupling
// rates (rad/s); delta_a = omega_probe - omega_atom, delta_c = omega_probe -
// omega_cavity; omega_drive is the external drive Rabi frequency on the
// unit-amplitude transition.
struct SystemParams {
  double g = 0.0;
  double kappa = 0.0;
  double gamma = 0.0;
  double delta_a = 0.0;
  double delta_c = 0.0;
  double omega_drive = 0.0;
};

// Throws std::invalid_argument naming the offending field.
void validate(const SystemParams& p);

double cooperativity(const SystemParams& p);          // C = g^2/(2 kappa gamma)
double purcell_factor(const SystemParams& p);         // f_P = 2C
double collection_efficiency(const SystemParams& p);  // f_P/(f_P + 1)

// Mirror budget of a Fabry-Perot resonator. Transmissions and losses are
// per-round-trip power fractions.
struct CavityGeometry {
  double free_spectral_range = 0.0;  // Hz
  double t_ht = 0.0;
  double t_lt = 0.0;
  double losses = 0.0;
};

void validate(const CavityGeometry& c);

double finesse(const CavityGeometry& c);             // 2pi/(t_ht + t_lt + losses)
double kappa_from_geometry(const CavityGeometry& c); // rad/s; cavity FWHM in Hz is 2*kappa/2pi
double eta_ht_from_mirrors(const CavityGeometry& c); // t_ht/(t_ht + t_lt + losses)

struct DetectionChain {
  double eta_ht = 1.0;        // out-coupling fraction through the HT mirror
  double eta_c = 1.0;         // end-to-end cavity-path detection efficiency
  double eta_fs = 1.0;        // free-space detection efficiency
  double jitter_sigma = 0.0;  // s
  double tick = 81e-12;       // s
};

void validate(const DetectionChain& d);

}  // namespace cqed
