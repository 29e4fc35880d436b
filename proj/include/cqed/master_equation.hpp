#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <vector>

#include "cqed/level_scheme.hpp"
#include "cqed/params.hpp"

namespace cqed {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Classical drive on the atom, expressed in the frame rotating at the probe
// frequency. rabi is the Rabi frequency on the unit-amplitude transition;
// weights are complex amplitudes on (sigma-, pi, sigma+) with unit total
// power. detuning is this drive's offset from the common probe frame; all
// drives in one Hamiltonian must share it (a static frame cannot hold two
// frequencies).
struct DriveField {
  double rabi = 0.0;
  double detuning = 0.0;
  std::array<std::complex<double>, 3> weights = {0.0, 0.0, 1.0};
};

void validate(const DriveField& d);

struct CavityModeSpec {
  int n_max = 2;  // photon-number truncation, >= 1
  Polarization pol = Polarization::sigma_plus;
  double g_max = 0.0;  // coupling on the unit-amplitude transition
};

void validate(const CavityModeSpec& c);

struct Detunings {
  double delta_a = 0.0;  // probe minus atom
  double delta_c = 0.0;  // probe minus cavity
};

// Full basis is |atom> x |n>, index = atom*(n_max+1) + n, grounds first.
int hilbert_dim(const LevelScheme& s, const CavityModeSpec& c);

// Atomic lowering operator for one polarization, embedded in the full space:
// sum of amplitude * |g><e| over couplings with that polarization.
Matrix atom_lowering(const LevelScheme& s, Polarization q, int n_max);

// Photon annihilation on the full space.
Matrix photon_annihilation(const LevelScheme& s, int n_max);

// Rotating-frame Hamiltonian: level shifts, -delta_a on the excited manifold,
// -delta_c a^dag a, cavity exchange on its polarization, and the drive terms.
// Throws if the cavity polarization couples no transition or the drives
// disagree on detuning.
Matrix build_hamiltonian(const LevelScheme& s, const std::vector<DriveField>& drives,
                         const CavityModeSpec& cavity, const Detunings& d);

// Jump operators: sqrt(2 kappa) a plus one sqrt(2 gamma)-weighted atomic
// operator per polarization (branching amplitudes inside).
std::vector<Matrix> jump_operators(const LevelScheme& s, const CavityModeSpec& cavity,
                                   double gamma, double kappa);

// Column-major-vec superoperator of the Lindblad generator. Throws on
// non-Hermitian H (tolerance 1e-9 relative).
Matrix build_liouvillian(const Matrix& h, const std::vector<Matrix>& jumps);

// Everything needed to pose one master-equation problem.
struct AtomCavitySystem {
  LevelScheme scheme;
  std::vector<DriveField> drives;
  CavityModeSpec cavity;
  Detunings detunings;
  double gamma = 0.0;
  double kappa = 0.0;

  int dim() const { return hilbert_dim(scheme, cavity); }
  Matrix hamiltonian() const { return build_hamiltonian(scheme, drives, cavity, detunings); }
  std::vector<Matrix> jumps() const { return jump_operators(scheme, cavity, gamma, kappa); }
};

AtomCavitySystem two_level_system(const SystemParams& p, int n_max = 2);

struct DensityMatrix {
  Matrix rho;
  double residual = 0.0;   // ||L rho|| / ||L||
  bool converged = false;
  bool degenerate = false;  // null space dimension > 1 suspected
};

// rho invariant checks; throws std::runtime_error when violated.
void check_density_matrix(const Matrix& rho, double herm_tol = 1e-10, double trace_tol = 1e-10,
                          double positivity_floor = -1e-8);

enum class SteadyStateMethod { automatic, dense, sparse_direct, evolve };

struct SteadyStateOptions {
  SteadyStateMethod method = SteadyStateMethod::automatic;
  int dense_dim_limit = 80;     // dense LU while dim <= limit
  double residual_tol = 1e-10;  // on ||L rho|| / ||L||
  double evolve_max_time = 1e6; // in units of 1/max_rate
};

DensityMatrix steady_state(const AtomCavitySystem& sys, const SteadyStateOptions& opt = {});

struct EmissionRates {
  double free_space = 0.0;  // 2 gamma * excited population
  double cavity = 0.0;      // 2 kappa * <a^dag a>
};

EmissionRates rates(const Matrix& rho, const AtomCavitySystem& sys);

// Raises n_max until both rates move by less than rel_tol; returns the
// converged solution and writes the n_max used.
DensityMatrix steady_state_converged(AtomCavitySystem sys, double rel_tol, int n_max_cap,
                                     int* n_max_used = nullptr,
                                     const SteadyStateOptions& opt = {});

// Drive photon input rate from the steady-state coherence: -Omega Im<W>,
// W = sum_q w_q A_q. Equals free_space + cavity rate in steady state.
double drive_input_rate(const Matrix& rho, const AtomCavitySystem& sys);

// Conditional cavity intensity after one cavity emission, by the regression
// rule: g2(tau) = tr[n e^{L tau}(a rho_ss a+)] / <n>^2. taus nondecreasing,
// >= 0; integrated with fixed-step RK4 landing exactly on each tau.
std::vector<double> cavity_g2(const AtomCavitySystem& sys, const std::vector<double>& taus);

}  // namespace cqed
