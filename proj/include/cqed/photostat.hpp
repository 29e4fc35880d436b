#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "cqed/fit.hpp"

namespace cqed {

// Time-tagged detector record. Ticks are nondecreasing; simultaneous tags on
// one detector are allowed (coalesced photons).
struct ClickStream {
  int detector = 0;
  double tick = 81e-12;  // s
  std::vector<std::uint64_t> ticks;
};

void validate(const ClickStream& s);
ClickStream stream_from_times(const std::vector<double>& times_s, double tick = 81e-12,
                              int detector = 0);
std::vector<double> click_times(const ClickStream& s);
// (last tick + 1) * tick; 0 for an empty stream.
double acquisition_span(const ClickStream& s);

struct G2Histogram {
  std::vector<double> edges;  // 2m+1 edges spanning [-tau_max, tau_max], s
  std::vector<double> raw;    // coincidence counts per bin
  double norm = 0.0;          // <c1><c2> (T - tau_max) bin_width
  std::vector<double> value;  // raw / norm
  std::vector<double> error;  // sqrt(raw) / norm
  std::vector<double> centers() const;
};

// Cross-correlation of two streams over lags in [-tau_max, tau_max). The
// negative half is computed as the positive half of the swapped pair, so
// exchanging the streams mirrors the histogram exactly. Pairs at lag zero
// land in the first bin on both sides.
G2Histogram g2_histogram(const ClickStream& s1, const ClickStream& s2, double bin_width,
                         double tau_max);

struct G2ModelParams {
  double b = 0.0;              // bunching amplitude
  double tau_b = 1e-7;         // bunching decay time, s
  double gamma_c_prime = 0.0;  // dip rate, 1/s
  double jitter_sigma = 0.0;   // s
};

void validate(const G2ModelParams& m);

// 1 - (1+b) e^{-2|tau| g'} + b e^{-|tau|/tau_b}; exactly 0 at tau = 0.
double g2_model(double tau, const G2ModelParams& m);

// The same curve convolved with a centered Gaussian of width jitter_sigma.
// Closed form through scaled complementary error functions; jitter_sigma = 0
// returns the raw model.
double g2_model_jittered(double tau, const G2ModelParams& m);

struct HbtOptions {
  double ratio = 0.5;         // fraction routed to the first output
  double jitter_sigma = 0.0;  // per-detector Gaussian timestamp noise, s
  double dead_time = 0.0;     // per-detector, s
};

// Bernoulli routing of each click to one of two detectors, with optional
// timestamp jitter (re-sorted) and dead-time removal.
std::pair<ClickStream, ClickStream> simulate_hbt_split(const ClickStream& s, std::uint64_t seed,
                                                       const HbtOptions& opt = {});

// Weighted least squares of (b, tau_b, gamma_c_prime) against a histogram
// with its per-bin errors; jitter width held fixed. Featureless input drives
// b to zero and leaves the dip rate unconstrained (degenerate flag).
FitResult fit_g2(const G2Histogram& h, double jitter_sigma, const FitOptions& o = {});
G2ModelParams g2_params_from_fit(const FitResult& r, double jitter_sigma);

// Single-parameter reduction of the model above, 1 - exp(-2 |tau| g'). For a
// record with no slow intensity modulation nothing holds the bunching terms
// up: chi2 only falls as b grows along a flat valley, so the full fit has no
// interior optimum and the recovery rate alone is the well-posed summary.
FitResult fit_recovery_rate(const G2Histogram& h, double jitter_sigma, const FitOptions& o = {});

// Homogeneous Poisson click train.
ClickStream poisson_stream(double rate, double duration, std::uint64_t seed, double tick = 81e-12,
                           int detector = 0);

// Random-telegraph modulated Poisson train: exponential dwells between a
// bright and a dark rate. Its cross-correlation after a split is
// 1 + b e^{-|tau|/tau_c} with b = p_b p_d (r_b - r_d)^2 / rbar^2 and
// tau_c = (1/dwell_b + 1/dwell_d)^{-1}.
ClickStream telegraph_stream(double bright_rate, double dark_rate, double bright_dwell,
                             double dark_dwell, double duration, std::uint64_t seed,
                             double tick = 81e-12, int detector = 0);

}  // namespace cqed
