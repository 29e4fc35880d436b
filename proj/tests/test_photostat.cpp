#include "cqed/photostat.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "cqed/master_equation.hpp"
#include "cqed/trajectories.hpp"
#include "cqed/units.hpp"
#include "doctest.h"

using namespace cqed;

namespace {

G2ModelParams narrow_dip() {
  G2ModelParams m;
  m.b = 0.33;
  m.tau_b = 200e-9;
  m.gamma_c_prime = 1.0 / (2.0 * 3.3e-9);
  return m;
}

// Brute-force Gaussian blur of the bare model, as an independent route to
// the closed form. Simpson rule; the integrand kink at zero lag is well
// inside the resolution.
double blurred_by_quadrature(double tau, const G2ModelParams& m) {
  G2ModelParams raw = m;
  raw.jitter_sigma = 0.0;
  const double s = m.jitter_sigma;
  const int n = 4000;
  const double lo = tau - 8.0 * s;
  const double h = 16.0 * s / n;
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double u = lo + i * h;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc += w * g2_model(u, raw) * std::exp(-0.5 * (tau - u) * (tau - u) / (s * s));
  }
  return acc * h / 3.0 / (s * std::sqrt(2.0 * std::acos(-1.0)));
}

// Purcell-regime single-emitter config used for the conditional-intensity
// checks: cooperativity 2 in a fast cavity, gently driven.
SystemParams purcell_probe() {
  SystemParams p;
  p.kappa = rad_from_mhz(100.0);
  p.gamma = rad_from_mhz(3.0326);
  p.g = std::sqrt(2.0 * 2.0 * p.kappa * p.gamma);
  p.omega_drive = 0.3 * p.gamma;
  return p;
}

G2Histogram synthetic_histogram(const G2ModelParams& truth, int m, double bin_width, double norm) {
  G2Histogram h;
  h.norm = norm;
  h.edges.resize(2 * m + 1);
  for (int k = 0; k <= 2 * m; ++k) h.edges[k] = (k - m) * bin_width;
  h.value.resize(2 * m);
  h.raw.resize(2 * m);
  h.error.resize(2 * m);
  const std::vector<double> c = h.centers();
  for (int i = 0; i < 2 * m; ++i) {
    h.value[i] = g2_model_jittered(c[i], truth);
    h.raw[i] = h.value[i] * norm;
    h.error[i] = std::sqrt(h.raw[i]) / norm;
  }
  return h;
}

}  // namespace

TEST_CASE("click streams validate and convert") {
  ClickStream s = stream_from_times({3e-9, 1e-9, 2e-9}, 1e-9);
  REQUIRE(s.ticks.size() == 3);
  // rounding can shuffle near-coincident tags; the stream comes back sorted
  CHECK(s.ticks[0] == 1);
  CHECK(s.ticks[1] == 2);
  CHECK(s.ticks[2] == 3);
  CHECK(click_times(s)[2] == doctest::Approx(3e-9).epsilon(1e-12));
  CHECK(acquisition_span(s) == doctest::Approx(4e-9).epsilon(1e-12));

  CHECK(acquisition_span(ClickStream{}) == 0.0);
  CHECK(stream_from_times({1.49e-9}, 1e-9).ticks[0] == 1);
  CHECK(stream_from_times({1.51e-9}, 1e-9).ticks[0] == 2);

  ClickStream bad;
  bad.ticks = {5, 3};
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
  ClickStream zero_tick;
  zero_tick.tick = 0.0;
  CHECK_THROWS_AS(validate(zero_tick), std::invalid_argument);
  CHECK_THROWS_AS(stream_from_times({-1e-9}, 1e-9), std::invalid_argument);
  CHECK_THROWS_AS(stream_from_times({1e-9}, 0.0), std::invalid_argument);
}

TEST_CASE("independent detectors correlate flat at one") {
  const ClickStream s1 = poisson_stream(1e4, 100.0, 101);
  const ClickStream s2 = poisson_stream(1e4, 100.0, 202);
  const G2Histogram h = g2_histogram(s1, s2, 40e-9, 2e-6);

  REQUIRE(h.edges.size() == 101);
  CHECK(h.edges.front() == doctest::Approx(-2e-6).epsilon(1e-12));
  CHECK(h.edges.back() == doctest::Approx(2e-6).epsilon(1e-12));
  CHECK(h.norm == doctest::Approx(400.0).epsilon(0.05));

  double mean = 0.0;
  double chi2 = 0.0;
  for (std::size_t i = 0; i < h.value.size(); ++i) {
    REQUIRE(h.error[i] > 0.0);
    CHECK(std::abs(h.value[i] - 1.0) <= 5.0 * h.error[i]);
    mean += h.value[i];
    chi2 += (h.value[i] - 1.0) * (h.value[i] - 1.0) / (h.error[i] * h.error[i]);
  }
  mean /= static_cast<double>(h.value.size());
  chi2 /= static_cast<double>(h.value.size());
  CHECK(mean == doctest::Approx(1.0).epsilon(0.015));
  // uncorrelated counting noise only
  CHECK(chi2 > 0.65);
  CHECK(chi2 < 1.40);

  CHECK_THROWS_AS(g2_histogram(ClickStream{}, s2, 40e-9, 2e-6), std::invalid_argument);
  CHECK_THROWS_AS(g2_histogram(s1, s2, 1e-12, 2e-6), std::invalid_argument);
  CHECK_THROWS_AS(g2_histogram(s1, s2, 40e-9, 1e-9), std::invalid_argument);
  ClickStream coarse = s2;
  coarse.tick = 2 * s2.tick;
  CHECK_THROWS_AS(g2_histogram(s1, coarse, 40e-9, 2e-6), std::invalid_argument);
  const ClickStream blip = stream_from_times({0.0, 1e-6});
  CHECK_THROWS_AS(g2_histogram(blip, blip, 1e-6, 2e-6), std::invalid_argument);
}

TEST_CASE("perfectly alternating sources dip to zero") {
  std::vector<double> even, odd;
  for (int k = 1; k <= 400; ++k) (k % 2 ? odd : even).push_back(k * 1e-6);
  const ClickStream s1 = stream_from_times(even);
  const ClickStream s2 = stream_from_times(odd);

  const G2Histogram h = g2_histogram(s1, s2, 0.8e-6, 2e-6);
  REQUIRE(h.raw.size() == 4);
  // every partner click is one period away, never inside the same bin
  CHECK(h.raw[0] == 200.0);
  CHECK(h.raw[1] == 0.0);
  CHECK(h.raw[2] == 0.0);
  CHECK(h.raw[3] == 199.0);
  CHECK(h.value[1] == 0.0);
  CHECK(h.error[1] == 0.0);
}

TEST_CASE("swapping the inputs mirrors the histogram") {
  const ClickStream s1 = poisson_stream(2e4, 2.0, 7);
  const ClickStream s2 = poisson_stream(2e4, 2.0, 8);
  const G2Histogram h12 = g2_histogram(s1, s2, 1e-7, 1e-6);
  const G2Histogram h21 = g2_histogram(s2, s1, 1e-7, 1e-6);
  REQUIRE(h12.raw.size() == h21.raw.size());
  CHECK(h12.norm == h21.norm);
  const std::size_t n = h12.raw.size();
  for (std::size_t i = 0; i < n; ++i) CHECK(h12.raw[i] == h21.raw[n - 1 - i]);
}

TEST_CASE("dip model vanishes at zero lag and recovers") {
  const G2ModelParams m = narrow_dip();
  CHECK(g2_model(0.0, m) == 0.0);
  CHECK(g2_model(-4e-9, m) == g2_model(4e-9, m));
  CHECK(g2_model(1e-3, m) == doctest::Approx(1.0).epsilon(1e-12));

  G2ModelParams bare = m;
  bare.b = 0.0;
  const double half = std::log(2.0) / (2.0 * bare.gamma_c_prime);
  CHECK(g2_model(half, bare) == doctest::Approx(0.5).epsilon(1e-12));

  G2ModelParams bad = m;
  bad.b = -0.1;
  CHECK_THROWS_AS(g2_model(0.0, bad), std::invalid_argument);
  bad = m;
  bad.tau_b = 0.0;
  CHECK_THROWS_AS(g2_model(0.0, bad), std::invalid_argument);
  bad = m;
  bad.gamma_c_prime = 0.0;
  CHECK_THROWS_AS(g2_model(0.0, bad), std::invalid_argument);
  bad = m;
  bad.jitter_sigma = -1e-9;
  CHECK_THROWS_AS(g2_model_jittered(0.0, bad), std::invalid_argument);
}

TEST_CASE("timing jitter rounds the dip without moving the plateau") {
  G2ModelParams m = narrow_dip();

  SUBCASE("zero width is the bare model") {
    for (double tau : {0.0, 1e-9, 5e-9, 40e-9}) CHECK(g2_model_jittered(tau, m) == g2_model(tau, m));
  }

  m.jitter_sigma = 1.35e-9;

  SUBCASE("closed form against direct quadrature and frozen values") {
    const double expected[] = {0.34131954, 0.41003418, 0.79523814, 1.29522946};
    const double taus[] = {0.0, 1e-9, 3.3e-9, 20e-9};
    for (int i = 0; i < 4; ++i) {
      const double closed = g2_model_jittered(taus[i], m);
      CHECK(closed == doctest::Approx(expected[i]).epsilon(1e-7));
      CHECK(std::abs(closed - blurred_by_quadrature(taus[i], m)) < 1.5e-6);
    }
    CHECK(g2_model_jittered(-20e-9, m) == g2_model_jittered(20e-9, m));
  }

  SUBCASE("zero-lag leakage barely depends on the bunching time") {
    double lo = 1e9, hi = -1e9;
    for (double tau_b : {50e-9, 200e-9, 500e-9}) {
      G2ModelParams v = m;
      v.tau_b = tau_b;
      const double g0 = g2_model_jittered(0.0, v);
      CHECK(g0 > 0.29);
      CHECK(g0 < 0.39);
      lo = std::min(lo, g0);
      hi = std::max(hi, g0);
    }
    CHECK(hi - lo < 0.02);
    G2ModelParams v = m;
    v.tau_b = 50e-9;
    CHECK(g2_model_jittered(0.0, v) == doctest::Approx(0.336099).epsilon(1e-5));
    v.tau_b = 200e-9;
    CHECK(g2_model_jittered(0.0, v) == doctest::Approx(0.341320).epsilon(1e-5));
    v.tau_b = 500e-9;
    CHECK(g2_model_jittered(0.0, v) == doctest::Approx(0.342380).epsilon(1e-5));
  }

  SUBCASE("more jitter fills the dip monotonically") {
    double prev = -1.0;
    for (double sig : {1e-12, 0.5e-9, 1e-9, 2e-9, 5e-9}) {
      G2ModelParams v = m;
      v.jitter_sigma = sig;
      const double g0 = g2_model_jittered(0.0, v);
      CHECK(g0 > prev);
      prev = g0;
    }
  }

  SUBCASE("far tail and washed-out limit stay finite") {
    CHECK(g2_model_jittered(5e-6, m) == doctest::Approx(1.0).epsilon(1e-9));
    G2ModelParams wide = m;
    wide.jitter_sigma = 1e-6;
    // dip fully blurred away, bunching partly survives
    const double g0 = g2_model_jittered(0.0, wide);
    CHECK(g0 > 1.0);
    CHECK(g0 < 1.0 + wide.b);
  }
}

TEST_CASE("histogram fit recovers planted parameters") {
  G2ModelParams truth = narrow_dip();
  truth.tau_b = 50e-9;
  truth.jitter_sigma = 1.35e-9;
  const G2Histogram h = synthetic_histogram(truth, 60, 2e-9, 1e6);

  const FitResult r = fit_g2(h, truth.jitter_sigma);
  REQUIRE(r.converged);
  const G2ModelParams got = g2_params_from_fit(r, truth.jitter_sigma);
  CHECK(got.b == doctest::Approx(truth.b).epsilon(1e-3));
  CHECK(got.tau_b == doctest::Approx(truth.tau_b).epsilon(1e-3));
  CHECK(got.gamma_c_prime == doctest::Approx(truth.gamma_c_prime).epsilon(1e-3));

  G2Histogram tiny = synthetic_histogram(truth, 5, 2e-9, 1e6);
  CHECK_THROWS_AS(fit_g2(tiny, 0.0), std::invalid_argument);
  G2Histogram unnormed = h;
  unnormed.norm = 0.0;
  CHECK_THROWS_AS(fit_g2(unnormed, 0.0), std::invalid_argument);
}

TEST_CASE("featureless data pins the bunching amplitude at zero") {
  G2Histogram h;
  const int m = 30;
  h.norm = 1e4;
  h.edges.resize(2 * m + 1);
  for (int k = 0; k <= 2 * m; ++k) h.edges[k] = (k - m) * 2e-9;
  h.value.assign(2 * m, 1.0);
  h.raw.assign(2 * m, h.norm);
  h.error.assign(2 * m, 1.0 / std::sqrt(h.norm));

  const FitResult r = fit_g2(h, 0.0);
  CHECK(r.params[0] < 1e-2);
  // with no bunching the bunching time drops out of the model entirely
  CHECK(r.degenerate);
}

TEST_CASE("telegraph blinking round trip") {
  const double bright = 1e4, dark = 1e3, dwell = 50e-6, span = 60.0;
  const ClickStream s = telegraph_stream(bright, dark, dwell, dwell, span, 31);
  // stationary mean rate, including blinking inflation of the variance
  CHECK(static_cast<double>(s.ticks.size()) / span == doctest::Approx(5500.0).epsilon(0.03));

  const auto halves = simulate_hbt_split(s, 32, {});
  const G2Histogram h = g2_histogram(halves.first, halves.second, 2e-6, 100e-6);
  REQUIRE(h.value.size() == 100);

  // independent route: stationary two-state statistics give the bunching
  // amplitude and correlation time directly
  const double b_true = 0.669421, tau_true = 25e-6;
  double chi2 = 0.0;
  const std::vector<double> c = h.centers();
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double model = 1.0 + b_true * std::exp(-std::abs(c[i]) / tau_true);
    CHECK(std::abs(h.value[i] - model) < 8.0 * h.error[i]);
    chi2 += (h.value[i] - model) * (h.value[i] - model) / (h.error[i] * h.error[i]);
  }
  // counting errors understate bin variance here: the intensity itself
  // fluctuates, so allow clearly super-Poisson scatter
  CHECK(chi2 / static_cast<double>(c.size()) < 3.0);

  FitData d;
  d.x = c;
  d.y = h.value;
  d.sigma = h.error;
  ParametricModel blink;
  blink.names = {"amplitude", "b", "tau_c"};
  blink.init = {1.0, 0.5, 20e-6};
  blink.lower = {0.5, 0.0, 1e-6};
  blink.upper = {2.0, 10.0, 1e-3};
  blink.eval = [](const std::vector<double>& p, double x) {
    return p[0] * (1.0 + p[1] * std::exp(-std::abs(x) / p[2]));
  };
  const FitResult r = least_squares_fit(blink, d);
  REQUIRE(r.converged);
  CHECK(r.params[0] == doctest::Approx(1.0).epsilon(0.03));
  CHECK(r.params[1] == doctest::Approx(b_true).epsilon(0.20));
  CHECK(r.params[2] == doctest::Approx(tau_true).epsilon(0.25));

  CHECK_THROWS_AS(telegraph_stream(-1.0, dark, dwell, dwell, span, 1), std::invalid_argument);
  CHECK_THROWS_AS(telegraph_stream(bright, dark, 0.0, dwell, span, 1), std::invalid_argument);
  CHECK_THROWS_AS(telegraph_stream(bright, dark, dwell, dwell, 0.0, 1), std::invalid_argument);
}

TEST_CASE("beamsplitter bookkeeping") {
  const ClickStream s = poisson_stream(1e5, 1.0, 55);
  const double n = static_cast<double>(s.ticks.size());

  SUBCASE("an even split conserves and balances the counts") {
    const auto halves = simulate_hbt_split(s, 56, {});
    CHECK(halves.first.ticks.size() + halves.second.ticks.size() == s.ticks.size());
    CHECK(std::abs(static_cast<double>(halves.first.ticks.size()) - 0.5 * n) <
          5.0 * std::sqrt(0.25 * n));
    CHECK(halves.first.detector == 0);
    CHECK(halves.second.detector == 1);
  }

  SUBCASE("an uneven split follows the ratio") {
    HbtOptions opt;
    opt.ratio = 0.25;
    const auto parts = simulate_hbt_split(s, 57, opt);
    CHECK(std::abs(static_cast<double>(parts.first.ticks.size()) - 0.25 * n) <
          5.0 * std::sqrt(0.1875 * n));
    opt.ratio = 1.0;
    CHECK(simulate_hbt_split(s, 58, opt).second.ticks.empty());
  }

  SUBCASE("dead time enforces a minimum gap") {
    HbtOptions opt;
    opt.dead_time = 1e-6;
    const auto parts = simulate_hbt_split(s, 59, opt);
    CHECK(parts.first.ticks.size() + parts.second.ticks.size() < s.ticks.size());
    const std::uint64_t gap = static_cast<std::uint64_t>(std::ceil(opt.dead_time / s.tick));
    for (const ClickStream* out : {&parts.first, &parts.second})
      for (std::size_t i = 1; i < out->ticks.size(); ++i)
        REQUIRE(out->ticks[i] - out->ticks[i - 1] >= gap);
  }

  SUBCASE("jitter moves tags but keeps them ordered and counted") {
    const ClickStream sparse = poisson_stream(1e3, 1.0, 60);
    HbtOptions opt;
    opt.jitter_sigma = 200e-9;
    const auto parts = simulate_hbt_split(sparse, 61, opt);
    CHECK(parts.first.ticks.size() + parts.second.ticks.size() == sparse.ticks.size());
    CHECK_NOTHROW(validate(parts.first));
    CHECK_NOTHROW(validate(parts.second));
    std::size_t moved = 0;
    for (std::uint64_t tk : parts.first.ticks)
      if (!std::binary_search(sparse.ticks.begin(), sparse.ticks.end(), tk)) ++moved;
    CHECK(moved > parts.first.ticks.size() / 2);
  }

  SUBCASE("options are validated") {
    HbtOptions opt;
    opt.ratio = 1.1;
    CHECK_THROWS_AS(simulate_hbt_split(s, 1, opt), std::invalid_argument);
    opt.ratio = 0.5;
    opt.jitter_sigma = -1.0;
    CHECK_THROWS_AS(simulate_hbt_split(s, 1, opt), std::invalid_argument);
    opt.jitter_sigma = 0.0;
    opt.dead_time = -1.0;
    CHECK_THROWS_AS(simulate_hbt_split(s, 1, opt), std::invalid_argument);
  }
}

TEST_CASE("conditional intensity after a cavity click matches the frozen curve") {
  const SystemParams p = purcell_probe();
  const AtomCavitySystem sys = two_level_system(p, 2);

  const std::vector<double> taus = {0.0, 2e-9, 5e-9, 10e-9, 20e-9, 40e-9, 80e-9};
  const std::vector<double> expected = {0.01736324, 0.04043863, 0.15092675, 0.41298843,
                                        0.77974936, 0.97528475, 0.99971953};
  const std::vector<double> got = cavity_g2(sys, taus);
  REQUIRE(got.size() == expected.size());
  for (std::size_t i = 0; i < got.size(); ++i)
    CHECK(got[i] == doctest::Approx(expected[i]).epsilon(2e-4));
  CHECK(std::is_sorted(got.begin(), got.end()));
  CHECK(got[0] < 0.5);

  CHECK_THROWS_AS(cavity_g2(sys, {1e-9, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(cavity_g2(sys, {-1e-9}), std::invalid_argument);
  SystemParams undriven = p;
  undriven.omega_drive = 0.0;
  CHECK_THROWS_AS(cavity_g2(two_level_system(undriven, 2), {0.0, 1e-9}), std::runtime_error);
}

TEST_CASE("split cavity record reproduces the predicted correlation") {
  const SystemParams p = purcell_probe();
  const AtomCavitySystem sys = two_level_system(p, 2);

  TrajectoryOptions opt;
  opt.duration = 1.0;
  opt.n_traj = 16;
  opt.seed = 4242;
  opt.burn_in = 2e-6;
  const auto trajs = mcwf_trajectories(sys, opt);
  const std::vector<double> times = concatenated_click_times(trajs, ClickChannel::cavity,
                                                             opt.duration);
  REQUIRE(times.size() > 100000);

  const ClickStream record = stream_from_times(times);
  const auto detectors = simulate_hbt_split(record, 99, {});
  const G2Histogram h = g2_histogram(detectors.first, detectors.second, 2e-9, 120e-9);
  REQUIRE(h.value.size() == 120);

  // the central bins stay well below the Poisson level
  CHECK(0.5 * (h.value[59] + h.value[60]) < 0.5);

  const FitResult measured = fit_recovery_rate(h, 0.0);
  REQUIRE(measured.converged);

  // prediction: the same estimator fed the bin-averaged conditional curve
  std::vector<double> grid(121);
  for (int k = 0; k <= 120; ++k) grid[k] = k * 1e-9;
  const std::vector<double> curve = cavity_g2(sys, grid);
  G2Histogram ideal = h;
  for (int k = 0; k < 60; ++k) {
    const double avg = (curve[2 * k] + 4.0 * curve[2 * k + 1] + curve[2 * k + 2]) / 6.0;
    ideal.value[60 + k] = avg;
    ideal.value[59 - k] = avg;
  }
  for (std::size_t i = 0; i < ideal.value.size(); ++i) {
    ideal.raw[i] = ideal.value[i] * ideal.norm;
    ideal.error[i] = std::sqrt(ideal.raw[i]) / ideal.norm;
  }
  const FitResult predicted = fit_recovery_rate(ideal, 0.0);
  REQUIRE(predicted.converged);

  const double t_pred = 1.0 / (2.0 * predicted.params[0]);
  const double t_meas = 1.0 / (2.0 * measured.params[0]);
  CHECK(t_pred == doctest::Approx(17.1658e-9).epsilon(0.005));
  CHECK(std::abs(t_meas - t_pred) / t_pred < 0.15);
}
