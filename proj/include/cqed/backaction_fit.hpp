#pragma once

#include <cstdint>
#include <vector>

#include "cqed/ensemble.hpp"
#include "cqed/fit.hpp"

namespace cqed {

// One probe power. Both detector channels are normalized to the rate the
// atom would scatter with the cavity far detuned, at the same atom detuning,
// so the free-space level tends to eta_fs when the cavity drops out. The two
// channels may use different cavity-detuning grids and either may be empty
// (not both).
struct BackactionDataset {
  double delta_a = 0.0;  // rad/s, fixed per power

  std::vector<double> delta_c_fs;  // rad/s
  std::vector<double> free_space;
  std::vector<double> free_space_sigma;  // optional, else counting errors

  std::vector<double> delta_c_cav;  // rad/s
  std::vector<double> cavity;
  std::vector<double> cavity_sigma;
};

struct BackactionFitConfig {
  double gamma = 0.0;    // rad/s, held fixed
  double g_sigma = 0.0;  // coupling spread, rad/s, held fixed
  int nodes = 41;

  double eta_fs_init = 1.0;
  double kappa_init = 0.0;
  double offset_init = 0.0;    // zero error of the cavity-detuning axis
  std::vector<double> g_init;  // one mean coupling per dataset; empty = seeded from the data

  bool weighted = true;  // counting errors per point; false treats all points evenly
  int bootstrap = 0;     // resamples for percentile intervals, 0 = plain fit
  uint64_t seed = 0;     // resampling seed

  FitOptions options;
};

// Model curves for one power at explicit parameter values. This is the same
// expression the fit minimizes, so it doubles as a synthetic-data generator.
struct BackactionCurves {
  std::vector<double> free_space;
  std::vector<double> cavity;
};
BackactionCurves backaction_curves(const BackactionDataset& grid,
                                   const BackactionFitConfig& cfg, double eta_fs,
                                   double kappa, double offset, double g_mean);

// Joint fit of every curve at once: shared (eta_fs, kappa, offset) plus one
// mean coupling per power, 3 + n free parameters in the order
//   [eta_fs,] kappa, offset, g_0 .. g_{n-1}.
// eta_fs only scales the free-space channel and is dropped from the layout
// when no free-space points are supplied. Throws when the point count does
// not exceed the parameter count.
FitResult backaction_surface_fit(const std::vector<BackactionDataset>& data,
                                 const BackactionFitConfig& cfg);

}  // namespace cqed
