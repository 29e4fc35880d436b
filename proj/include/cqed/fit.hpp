#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace cqed {

// Data for scalar-valued models y(x). Multi-curve and surface fits index
// their points through x (closures capture the actual grids).
struct FitData {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> sigma;  // empty = unweighted
};

using ModelFn = std::function<double(const std::vector<double>& params, double x)>;

struct ParametricModel {
  std::vector<std::string> names;
  std::vector<double> init;
  std::vector<double> lower;  // empty = unbounded
  std::vector<double> upper;
  ModelFn eval;
};

struct FitOptions {
  int max_iterations = 400;
  double ftol = 1e-14;
  double xtol = 1e-12;
  bool simplex_fallback = true;
  int threads = 1;  // bootstrap only
};

struct FitResult {
  std::vector<double> params;
  std::vector<double> sigma;            // one-sigma from covariance
  std::vector<double> covariance;       // row-major k x k
  std::vector<double> residuals;        // weighted residuals at optimum
  std::vector<double> objective_trace;  // objective at start + each accepted step
  double chi2 = 0.0;
  double chi2_per_dof = 0.0;
  bool converged = false;
  bool degenerate = false;  // ill-conditioned Jacobian at the optimum
  std::string message;
  // percentile bootstrap intervals (filled by bootstrap_errors)
  std::vector<double> ci_lower;
  std::vector<double> ci_upper;
  std::vector<std::vector<double>> bootstrap_params;  // one vector per resample
};

// Damped Gauss-Newton (Levenberg-Marquardt) with central-difference numeric
// Jacobians; clamps to bounds; optional Nelder-Mead fallback when the
// Jacobian is ill-conditioned or progress stalls. Deterministic.
FitResult least_squares_fit(const ParametricModel& m, const FitData& d, const FitOptions& o = {});

// Case-resampling bootstrap around least_squares_fit; per-resample seeds
// derived from (seed, resample index); 68% percentile intervals.
FitResult bootstrap_errors(const ParametricModel& m, const FitData& d, int n_resamples,
                           uint64_t seed, const FitOptions& o = {});

// Peak location/height and half-width at half maximum read off a smoothed
// curve; the recommended initializer for half-width fits.
struct PeakEstimate {
  double x0 = 0.0;
  double height = 0.0;
  double half_width = 0.0;
};
PeakEstimate estimate_peak(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace cqed
