#pragma once

#include <string>
#include <vector>

namespace cqed {

enum class Polarization : int { sigma_minus = -1, pi = 0, sigma_plus = 1 };

std::string polarization_name(Polarization q);
Polarization polarization_from_name(const std::string& name);

// Atomic level structure plus dipole couplings. Amplitudes are relative to the
// strongest (cycling) transition, which carries amplitude 1; the squared
// amplitudes out of any excited state sum to 1 (they are branching ratios).
struct LevelScheme {
  struct Ground {
    std::string label;
    int m_f = 0;
    double energy = 0.0;  // rad/s, Zeeman or other static shift
  };
  struct Excited {
    std::string label;
    int m_f = 0;
    double energy = 0.0;
    double stark_shift = 0.0;
  };
  struct Coupling {
    int ground = 0;   // index into ground
    int excited = 0;  // index into excited
    Polarization pol = Polarization::pi;
    double amplitude = 0.0;
  };

  std::vector<Ground> ground;
  std::vector<Excited> excited;
  std::vector<Coupling> couplings;

  int n_atom() const { return static_cast<int>(ground.size() + excited.size()); }
};

// Throws std::invalid_argument on index range errors, a missing unit-amplitude
// transition, or branching sums off 1 by more than 1e-9.
void validate(const LevelScheme& s);

// F=2 -> F'=3 with standard Clebsch-Gordan amplitudes, cycling
// |2,2> <-> |3',3'> at amplitude 1. 5 ground + 7 excited sublevels.
LevelScheme rb87_d2_scheme();

// Single ground/excited pair coupled by sigma+ at amplitude 1.
LevelScheme two_level_scheme();

std::string scheme_to_json(const LevelScheme& s);
LevelScheme scheme_from_json(const std::string& text);

}  // namespace cqed
