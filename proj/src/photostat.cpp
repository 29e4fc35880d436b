#include "cqed/photostat.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <stdexcept>

#include "cqed/rng.hpp"

namespace cqed {

namespace {

constexpr double kSqrtPi = 1.7724538509055160273;

// exp(x^2) erfc(x). The direct product is fine while exp(x^2) stays in
// range and erfc keeps relative accuracy; past that the asymptotic series
// in 1/(2x^2) converges to double precision within a few terms.
double erfcx(double x) {
  if (x <= 6.0) return std::exp(x * x) * std::erfc(x);
  const double half_ix2 = 0.5 / (x * x);
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k <= 6; ++k) {
    term *= -(2.0 * k - 1.0) * half_ix2;
    sum += term;
  }
  return sum / (x * kSqrtPi);
}

// (exp(-lambda |t|) * gaussian_sigma)(tau). Written so every erfcx argument
// is nonnegative; the textbook two-erfcx form overflows once tau runs a few
// sigma past the kernel center.
double exp_gauss_kernel(double tau, double lambda, double sigma) {
  const double t = std::abs(tau);
  const double a = sigma * lambda;
  const double u = t / sigma;
  const double z1 = (a - u) / std::sqrt(2.0);
  const double z2 = (a + u) / std::sqrt(2.0);
  const double gauss = std::exp(-0.5 * u * u);
  if (z1 >= 0.0) return 0.5 * gauss * (erfcx(z1) + erfcx(z2));
  return std::exp(0.5 * a * a - lambda * t) + 0.5 * gauss * (erfcx(z2) - erfcx(-z1));
}

// Pairs (a_i, b_j) with b_j >= a_i and lag below m * bin_width, binned by
// lag. The start pointer only moves forward, so the scan is linear in the
// clicks plus the pairs actually counted.
void forward_counts(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b,
                    double tick, double bin_width, int m, std::vector<double>& counts) {
  const double span = m * bin_width;
  std::size_t j0 = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    while (j0 < b.size() && b[j0] < a[i]) ++j0;
    for (std::size_t j = j0; j < b.size(); ++j) {
      const double lag = static_cast<double>(b[j] - a[i]) * tick;
      if (lag >= span) break;
      // lag / bin_width can round up to m when lag sits one ulp under span
      counts[std::min(m - 1, static_cast<int>(lag / bin_width))] += 1.0;
    }
  }
}

ClickStream drop_dead_time(const ClickStream& s, double dead_time) {
  ClickStream out;
  out.detector = s.detector;
  out.tick = s.tick;
  const std::uint64_t gap = static_cast<std::uint64_t>(std::ceil(dead_time / s.tick));
  for (std::uint64_t tk : s.ticks)
    if (out.ticks.empty() || tk - out.ticks.back() >= gap) out.ticks.push_back(tk);
  return out;
}

}  // namespace

void validate(const ClickStream& s) {
  if (!(s.tick > 0.0)) throw std::invalid_argument("click stream: tick must be positive");
  for (std::size_t i = 1; i < s.ticks.size(); ++i)
    if (s.ticks[i] < s.ticks[i - 1])
      throw std::invalid_argument("click stream: tags must be nondecreasing");
}

ClickStream stream_from_times(const std::vector<double>& times_s, double tick, int detector) {
  if (!(tick > 0.0)) throw std::invalid_argument("click stream: tick must be positive");
  ClickStream s;
  s.detector = detector;
  s.tick = tick;
  s.ticks.reserve(times_s.size());
  for (double t : times_s) {
    if (!(t >= 0.0)) throw std::invalid_argument("click stream: times must be nonnegative");
    s.ticks.push_back(static_cast<std::uint64_t>(std::llround(t / tick)));
  }
  // Rounding can swap near-coincident tags, so the grid order is
  // re-established here rather than demanded of the caller.
  std::sort(s.ticks.begin(), s.ticks.end());
  return s;
}

std::vector<double> click_times(const ClickStream& s) {
  validate(s);
  std::vector<double> t(s.ticks.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(s.ticks[i]) * s.tick;
  return t;
}

double acquisition_span(const ClickStream& s) {
  validate(s);
  if (s.ticks.empty()) return 0.0;
  return static_cast<double>(s.ticks.back() + 1) * s.tick;
}

std::vector<double> G2Histogram::centers() const {
  std::vector<double> c(edges.size() - 1);
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = 0.5 * (edges[i] + edges[i + 1]);
  return c;
}

G2Histogram g2_histogram(const ClickStream& s1, const ClickStream& s2, double bin_width,
                         double tau_max) {
  validate(s1);
  validate(s2);
  if (s1.ticks.empty() || s2.ticks.empty())
    throw std::invalid_argument("g2 histogram: empty click stream");
  if (s1.tick != s2.tick) throw std::invalid_argument("g2 histogram: streams on different grids");
  if (!(bin_width >= s1.tick)) throw std::invalid_argument("g2 histogram: bin below one tick");
  if (!(tau_max >= bin_width)) throw std::invalid_argument("g2 histogram: window below one bin");

  const int m = static_cast<int>(std::floor(tau_max / bin_width + 1e-9));
  const double span = m * bin_width;

  G2Histogram h;
  h.raw.assign(2 * m, 0.0);

  std::vector<double> half(m, 0.0);
  forward_counts(s1.ticks, s2.ticks, s1.tick, bin_width, m, half);
  for (int k = 0; k < m; ++k) h.raw[m + k] = half[k];
  // The negative half is the positive half of the swapped pair, so
  // exchanging the inputs mirrors the histogram bin for bin. Lag-zero pairs
  // sit in the innermost bin on both sides.
  std::fill(half.begin(), half.end(), 0.0);
  forward_counts(s2.ticks, s1.ticks, s1.tick, bin_width, m, half);
  for (int k = 0; k < m; ++k) h.raw[m - 1 - k] = half[k];

  h.edges.resize(2 * m + 1);
  for (int k = 0; k <= 2 * m; ++k) h.edges[k] = -span + k * bin_width;

  const double t_obs = std::max(acquisition_span(s1), acquisition_span(s2));
  const double t_eff = t_obs - span;
  if (!(t_eff > 0.0)) throw std::invalid_argument("g2 histogram: window longer than the record");
  const double r1 = static_cast<double>(s1.ticks.size()) / t_obs;
  const double r2 = static_cast<double>(s2.ticks.size()) / t_obs;
  h.norm = r1 * r2 * t_eff * bin_width;

  h.value.resize(h.raw.size());
  h.error.resize(h.raw.size());
  for (std::size_t i = 0; i < h.raw.size(); ++i) {
    h.value[i] = h.raw[i] / h.norm;
    h.error[i] = std::sqrt(h.raw[i]) / h.norm;
  }
  return h;
}

void validate(const G2ModelParams& m) {
  if (!(m.b >= 0.0)) throw std::invalid_argument("g2 model: bunching amplitude must be >= 0");
  if (!(m.tau_b > 0.0)) throw std::invalid_argument("g2 model: bunching time must be positive");
  if (!(m.gamma_c_prime > 0.0)) throw std::invalid_argument("g2 model: dip rate must be positive");
  if (!(m.jitter_sigma >= 0.0)) throw std::invalid_argument("g2 model: jitter must be >= 0");
}

double g2_model(double tau, const G2ModelParams& m) {
  validate(m);
  const double t = std::abs(tau);
  const double dip = std::exp(-2.0 * t * m.gamma_c_prime);
  const double bunch = std::exp(-t / m.tau_b);
  // Grouped so the value at zero lag is exactly zero.
  return (1.0 - dip) + m.b * (bunch - dip);
}

double g2_model_jittered(double tau, const G2ModelParams& m) {
  validate(m);
  if (m.jitter_sigma == 0.0) return g2_model(tau, m);
  const double dip = exp_gauss_kernel(tau, 2.0 * m.gamma_c_prime, m.jitter_sigma);
  const double bunch = exp_gauss_kernel(tau, 1.0 / m.tau_b, m.jitter_sigma);
  return (1.0 - dip) + m.b * (bunch - dip);
}

std::pair<ClickStream, ClickStream> simulate_hbt_split(const ClickStream& s, std::uint64_t seed,
                                                       const HbtOptions& opt) {
  validate(s);
  if (!(opt.ratio >= 0.0 && opt.ratio <= 1.0))
    throw std::invalid_argument("hbt split: ratio must lie in [0, 1]");
  if (!(opt.jitter_sigma >= 0.0)) throw std::invalid_argument("hbt split: jitter must be >= 0");
  if (!(opt.dead_time >= 0.0)) throw std::invalid_argument("hbt split: dead time must be >= 0");

  auto rng = make_rng(seed, 0x68627453706c6974ull);
  std::bernoulli_distribution to_first(opt.ratio);
  std::normal_distribution<double> noise(0.0, opt.jitter_sigma);

  std::vector<double> t1, t2;
  for (std::uint64_t tk : s.ticks) {
    double t = static_cast<double>(tk) * s.tick;
    if (opt.jitter_sigma > 0.0) t = std::max(0.0, t + noise(rng));
    (to_first(rng) ? t1 : t2).push_back(t);
  }
  ClickStream o1 = stream_from_times(t1, s.tick, 0);
  ClickStream o2 = stream_from_times(t2, s.tick, 1);
  if (opt.dead_time > 0.0) {
    o1 = drop_dead_time(o1, opt.dead_time);
    o2 = drop_dead_time(o2, opt.dead_time);
  }
  return {o1, o2};
}

namespace {

struct HistogramFitInput {
  FitData data;
  double rate_seed = 0.0;  // 1/(2 tau) at the 1 - 1/e recovery point
  double peak = 0.0;
  double plateau = 0.0;
  double tau_max = 0.0;
};

HistogramFitInput assemble_fit_input(const G2Histogram& h, double jitter_sigma) {
  if (h.value.size() < 12) throw std::invalid_argument("g2 fit: need at least 12 bins");
  if (!(h.norm > 0.0)) throw std::invalid_argument("g2 fit: histogram is not normalized");
  if (!(jitter_sigma >= 0.0)) throw std::invalid_argument("g2 fit: jitter must be >= 0");

  HistogramFitInput in;
  in.data.x = h.centers();
  in.data.y = h.value;
  in.data.sigma.resize(h.value.size());
  const double floor_sigma = 1.0 / h.norm;  // empty bins still carry one count of uncertainty
  for (std::size_t i = 0; i < in.data.sigma.size(); ++i)
    in.data.sigma[i] = std::max(h.error[i], floor_sigma);

  const double bin_width = h.edges[1] - h.edges[0];
  in.tau_max = h.edges.back();
  const std::size_t n = in.data.x.size();

  // Plateau from the outer quarter of the bins on each side; the recovery
  // point where the dip has climbed to 1 - 1/e of it seeds the rate.
  const std::size_t quarter = std::max<std::size_t>(1, n / 4);
  double plateau = 0.0;
  for (std::size_t i = 0; i < quarter; ++i) plateau += in.data.y[i] + in.data.y[n - 1 - i];
  plateau /= static_cast<double>(2 * quarter);
  in.plateau = plateau;

  double recovery = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (in.data.y[i] >= 0.632 * plateau) {
      const double t = std::abs(in.data.x[i]);
      if (recovery == 0.0 || t < recovery) recovery = t;
    }
  if (recovery < 0.5 * bin_width) recovery = 0.5 * bin_width;
  in.rate_seed = 0.5 / recovery;

  for (double v : in.data.y) in.peak = std::max(in.peak, v);
  return in;
}

}  // namespace

FitResult fit_g2(const G2Histogram& h, double jitter_sigma, const FitOptions& o) {
  const HistogramFitInput in = assemble_fit_input(h, jitter_sigma);

  // A record with neither a dip nor an excess over the plateau cannot
  // identify the bunching terms: every (b, tau_b) pair that hides the bunch
  // inside the innermost bin fits equally well. Pin them and fit the rate.
  std::vector<double> med = in.data.sigma;
  std::nth_element(med.begin(), med.begin() + med.size() / 2, med.end());
  const double noise = 4.0 * med[med.size() / 2];
  const double ymin = *std::min_element(in.data.y.begin(), in.data.y.end());
  if (in.plateau - ymin < noise && in.peak - in.plateau < noise) {
    const FitResult rate = fit_recovery_rate(h, jitter_sigma, o);
    FitResult out = rate;
    out.params = {0.0, 0.25 * in.tau_max, rate.params[0]};
    out.sigma = {0.0, 0.0, rate.sigma.empty() ? 0.0 : rate.sigma[0]};
    out.covariance.assign(9, 0.0);
    if (rate.covariance.size() == 1) out.covariance[8] = rate.covariance[0];
    out.degenerate = true;
    out.message = "featureless input: bunching terms held at zero";
    return out;
  }

  ParametricModel mdl;
  mdl.names = {"b", "tau_b", "gamma_c_prime"};
  mdl.init = {std::clamp(in.peak - 1.0, 0.0, 10.0), 0.25 * in.tau_max, in.rate_seed};
  mdl.lower = {0.0, 1e-12, 1.0};
  mdl.upper = {100.0, 10.0 * in.tau_max, 1e12};
  mdl.eval = [jitter_sigma](const std::vector<double>& p, double x) {
    G2ModelParams gp;
    gp.b = p[0];
    gp.tau_b = p[1];
    gp.gamma_c_prime = p[2];
    gp.jitter_sigma = jitter_sigma;
    return g2_model_jittered(x, gp);
  };
  return least_squares_fit(mdl, in.data, o);
}

FitResult fit_recovery_rate(const G2Histogram& h, double jitter_sigma, const FitOptions& o) {
  const HistogramFitInput in = assemble_fit_input(h, jitter_sigma);
  ParametricModel mdl;
  mdl.names = {"gamma_c_prime"};
  mdl.init = {in.rate_seed};
  mdl.lower = {1.0};
  mdl.upper = {1e12};
  mdl.eval = [jitter_sigma](const std::vector<double>& p, double x) {
    G2ModelParams gp;
    gp.b = 0.0;
    gp.tau_b = 1.0;
    gp.gamma_c_prime = p[0];
    gp.jitter_sigma = jitter_sigma;
    return g2_model_jittered(x, gp);
  };
  return least_squares_fit(mdl, in.data, o);
}

G2ModelParams g2_params_from_fit(const FitResult& r, double jitter_sigma) {
  if (r.params.size() != 3) throw std::invalid_argument("g2 fit: expected three parameters");
  G2ModelParams m;
  m.b = r.params[0];
  m.tau_b = r.params[1];
  m.gamma_c_prime = r.params[2];
  m.jitter_sigma = jitter_sigma;
  return m;
}

ClickStream poisson_stream(double rate, double duration, std::uint64_t seed, double tick,
                           int detector) {
  if (!(rate > 0.0)) throw std::invalid_argument("poisson stream: rate must be positive");
  if (!(duration > 0.0)) throw std::invalid_argument("poisson stream: duration must be positive");
  if (!(tick > 0.0)) throw std::invalid_argument("poisson stream: tick must be positive");
  auto rng = make_rng(seed, 0x706f6973736f6eull);
  std::exponential_distribution<double> gap(rate);
  ClickStream s;
  s.detector = detector;
  s.tick = tick;
  for (double t = gap(rng); t < duration; t += gap(rng))
    s.ticks.push_back(static_cast<std::uint64_t>(std::llround(t / tick)));
  return s;
}

ClickStream telegraph_stream(double bright_rate, double dark_rate, double bright_dwell,
                             double dark_dwell, double duration, std::uint64_t seed, double tick,
                             int detector) {
  if (!(bright_rate >= 0.0) || !(dark_rate >= 0.0))
    throw std::invalid_argument("telegraph stream: rates must be >= 0");
  if (!(bright_dwell > 0.0) || !(dark_dwell > 0.0))
    throw std::invalid_argument("telegraph stream: dwell times must be positive");
  if (!(duration > 0.0)) throw std::invalid_argument("telegraph stream: duration must be positive");
  if (!(tick > 0.0)) throw std::invalid_argument("telegraph stream: tick must be positive");

  auto rng = make_rng(seed, 0x74656c656772ull);
  std::exponential_distribution<double> unit(1.0);
  // Exponential dwells are memoryless, so starting a fresh dwell from the
  // stationary state occupation is already the stationary process.
  bool bright = std::bernoulli_distribution(bright_dwell / (bright_dwell + dark_dwell))(rng);

  ClickStream s;
  s.detector = detector;
  s.tick = tick;
  double t = 0.0;
  while (t < duration) {
    const double dwell = (bright ? bright_dwell : dark_dwell) * unit(rng);
    const double end = std::min(t + dwell, duration);
    const double rate = bright ? bright_rate : dark_rate;
    if (rate > 0.0) {
      std::exponential_distribution<double> gap(rate);
      for (double u = t + gap(rng); u < end; u += gap(rng))
        s.ticks.push_back(static_cast<std::uint64_t>(std::llround(u / tick)));
    }
    t += dwell;
    bright = !bright;
  }
  return s;
}

}  // namespace cqed
