#include "cqed/fit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cqed/parallel.hpp"
#include "cqed/rng.hpp"

namespace cqed {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Problem {
  const ParametricModel& m;
  const FitData& d;
  std::vector<double> lo, hi;

  Problem(const ParametricModel& mm, const FitData& dd) : m(mm), d(dd) {
    const std::size_t k = m.init.size();
    lo = m.lower.empty() ? std::vector<double>(k, -kInf) : m.lower;
    hi = m.upper.empty() ? std::vector<double>(k, kInf) : m.upper;
    if (lo.size() != k || hi.size() != k) throw std::invalid_argument("fit: bounds size mismatch");
    if (d.x.size() != d.y.size()) throw std::invalid_argument("fit: x/y size mismatch");
    if (!d.sigma.empty() && d.sigma.size() != d.y.size())
      throw std::invalid_argument("fit: sigma size mismatch");
    if (d.y.size() <= k) throw std::invalid_argument("fit: need more data points than parameters");
  }

  void clamp(std::vector<double>& p) const {
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::min(hi[i], std::max(lo[i], p[i]));
  }

  double weight(std::size_t i) const {
    if (d.sigma.empty()) return 1.0;
    return d.sigma[i] > 0.0 ? 1.0 / d.sigma[i] : 0.0;
  }

  // weighted residuals
  void residuals(const std::vector<double>& p, Eigen::VectorXd& r) const {
    const std::size_t n = d.y.size();
    r.resize(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
      r[static_cast<Eigen::Index>(i)] = (m.eval(p, d.x[i]) - d.y[i]) * weight(i);
  }

  double objective(const std::vector<double>& p) const {
    Eigen::VectorXd r;
    residuals(p, r);
    return r.squaredNorm();
  }

  // central differences, step scaled to the parameter magnitude (and kept
  // inside bounds by evaluating the one-sided difference if needed). A
  // parameter sitting at zero gets its scale from the bound span instead,
  // else its column would vanish and the fit would silently pin it there.
  void jacobian(const std::vector<double>& p, Eigen::MatrixXd& J) const {
    const std::size_t n = d.y.size(), k = p.size();
    J.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
    Eigen::VectorXd rp, rm;
    std::vector<double> q = p;
    for (std::size_t j = 0; j < k; ++j) {
      double scale = std::max(std::abs(p[j]), 1e-8);
      const double span_b = hi[j] - lo[j];
      if (std::isfinite(span_b) && span_b > 0.0) scale = std::max(scale, 1e-3 * span_b);
      const double h = 6e-6 * scale;
      const double up = std::min(p[j] + h, hi[j]);
      const double dn = std::max(p[j] - h, lo[j]);
      q[j] = up;
      residuals(q, rp);
      q[j] = dn;
      residuals(q, rm);
      q[j] = p[j];
      const double span = up - dn;
      if (span <= 0.0) {
        J.col(static_cast<Eigen::Index>(j)).setZero();
        continue;
      }
      J.col(static_cast<Eigen::Index>(j)) = (rp - rm) / span;
    }
  }
};

// Nelder-Mead on the same clamped objective. Deterministic.
void nelder_mead(const Problem& prob, std::vector<double>& p, double& fbest,
                 std::vector<double>& trace, int max_iter, double ftol) {
  const std::size_t k = p.size();
  std::vector<std::vector<double>> simplex(k + 1, p);
  std::vector<double> fv(k + 1);
  for (std::size_t j = 0; j < k; ++j) {
    double step = 0.05 * std::max(std::abs(p[j]), 1e-4);
    simplex[j + 1][j] += step;
    prob.clamp(simplex[j + 1]);
    if (simplex[j + 1][j] == p[j]) simplex[j + 1][j] = std::max(p[j] - step, prob.lo[j]);
  }
  for (std::size_t i = 0; i <= k; ++i) fv[i] = prob.objective(simplex[i]);

  auto order = [&] {
    std::vector<std::size_t> idx(k + 1);
    for (std::size_t i = 0; i <= k; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    std::vector<std::vector<double>> s2(k + 1);
    std::vector<double> f2(k + 1);
    for (std::size_t i = 0; i <= k; ++i) {
      s2[i] = simplex[idx[i]];
      f2[i] = fv[idx[i]];
    }
    simplex.swap(s2);
    fv.swap(f2);
  };
  order();
  double last_best = fv[0];

  for (int it = 0; it < max_iter; ++it) {
    // centroid of all but worst
    std::vector<double> c(k, 0.0);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) c[j] += simplex[i][j] / static_cast<double>(k);

    auto blend = [&](double t) {
      std::vector<double> q(k);
      for (std::size_t j = 0; j < k; ++j) q[j] = c[j] + t * (simplex[k][j] - c[j]);
      prob.clamp(q);
      return q;
    };

    auto refl = blend(-1.0);
    double fr = prob.objective(refl);
    if (fr < fv[0]) {
      auto expa = blend(-2.0);
      double fe = prob.objective(expa);
      if (fe < fr) {
        simplex[k] = expa;
        fv[k] = fe;
      } else {
        simplex[k] = refl;
        fv[k] = fr;
      }
    } else if (fr < fv[k - 1]) {
      simplex[k] = refl;
      fv[k] = fr;
    } else {
      auto contr = blend(fr < fv[k] ? -0.5 : 0.5);
      double fc = prob.objective(contr);
      if (fc < std::min(fr, fv[k])) {
        simplex[k] = contr;
        fv[k] = fc;
      } else {
        for (std::size_t i = 1; i <= k; ++i) {
          for (std::size_t j = 0; j < k; ++j)
            simplex[i][j] = simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j]);
          prob.clamp(simplex[i]);
          fv[i] = prob.objective(simplex[i]);
        }
      }
    }
    order();
    if (fv[0] < last_best) {
      trace.push_back(fv[0]);
      last_best = fv[0];
    }
    if (fv[k] - fv[0] <= ftol * (std::abs(fv[0]) + ftol)) break;
  }
  p = simplex[0];
  fbest = fv[0];
}

void finalize(const Problem& prob, FitResult& res) {
  const std::size_t n = prob.d.y.size(), k = res.params.size();
  Eigen::VectorXd r;
  prob.residuals(res.params, r);
  res.residuals.assign(r.data(), r.data() + r.size());
  res.chi2 = r.squaredNorm();
  const std::size_t dof = n > k ? n - k : 1;
  res.chi2_per_dof = res.chi2 / static_cast<double>(dof);

  Eigen::MatrixXd J;
  prob.jacobian(res.params, J);
  Eigen::MatrixXd jtj = J.transpose() * J;

  // judge rank on the unit-diagonal scaling of JtJ, else parameters carrying
  // big units (rates in rad/s next to dimensionless amplitudes) read as rank
  // loss no matter how well they are determined
  Eigen::VectorXd dscale = jtj.diagonal().cwiseMax(0.0).cwiseSqrt();
  const bool flat = (dscale.array() <= 0.0).any();
  res.covariance.assign(k * k, 0.0);
  res.sigma.assign(k, 0.0);
  if (flat) {
    res.degenerate = true;
    return;
  }
  Eigen::MatrixXd corr = dscale.cwiseInverse().asDiagonal() * jtj *
                         dscale.cwiseInverse().asDiagonal();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(corr);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(svd.singularValues().size() - 1);
  res.degenerate = !(smin > 0.0) || smax / smin > 1e12;

  if (!res.degenerate) {
    Eigen::MatrixXd cov = dscale.cwiseInverse().asDiagonal() * corr.inverse() *
                          dscale.cwiseInverse().asDiagonal();
    // unweighted fits estimate the noise scale from the residuals
    if (prob.d.sigma.empty()) cov *= res.chi2_per_dof;
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j)
        res.covariance[i * k + j] = cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      res.sigma[i] = std::sqrt(std::max(0.0, cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i))));
    }
  }
}

}  // namespace

FitResult least_squares_fit(const ParametricModel& m, const FitData& d, const FitOptions& o) {
  Problem prob(m, d);
  FitResult res;
  res.params = m.init;
  prob.clamp(res.params);

  double f = prob.objective(res.params);
  res.objective_trace.push_back(f);

  double lambda = 1e-3;
  bool stalled = false;
  Eigen::VectorXd r;
  Eigen::MatrixXd J;

  for (int it = 0; it < o.max_iterations; ++it) {
    prob.residuals(res.params, r);
    prob.jacobian(res.params, J);
    Eigen::MatrixXd jtj = J.transpose() * J;
    Eigen::VectorXd g = J.transpose() * r;

    if (g.lpNorm<Eigen::Infinity>() < 1e-14 * (1.0 + f)) {
      res.converged = true;
      break;
    }

    // damping floor relative to the largest curvature so that parameters in
    // units with tiny absolute diagonals are not frozen out of the step
    const double dfloor = 1e-12 * jtj.diagonal().maxCoeff();
    bool accepted = false;
    for (int tries = 0; tries < 12; ++tries) {
      Eigen::MatrixXd a = jtj;
      for (Eigen::Index i = 0; i < a.rows(); ++i)
        a(i, i) += lambda * std::max(jtj(i, i), dfloor);
      Eigen::VectorXd step = a.ldlt().solve(-g);
      if (!step.allFinite()) {
        lambda *= 10.0;
        continue;
      }
      std::vector<double> trial = res.params;
      for (std::size_t j = 0; j < trial.size(); ++j) trial[j] += step[static_cast<Eigen::Index>(j)];
      prob.clamp(trial);
      const double ft = prob.objective(trial);
      if (ft < f) {
        double max_rel_step = 0.0;
        for (std::size_t j = 0; j < trial.size(); ++j)
          max_rel_step = std::max(max_rel_step, std::abs(trial[j] - res.params[j]) /
                                                    (std::abs(res.params[j]) + o.xtol));
        const double decrease = f - ft;
        res.params = trial;
        f = ft;
        res.objective_trace.push_back(f);
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
        if (decrease <= o.ftol * (f + o.ftol) || max_rel_step <= o.xtol) res.converged = true;
        break;
      }
      lambda *= 5.0;
    }
    if (res.converged) break;
    if (!accepted) {
      stalled = true;
      break;
    }
  }

  if (!res.converged && o.simplex_fallback) {
    // derivative-free rescue for ill-conditioned or stalled problems
    nelder_mead(prob, res.params, f, res.objective_trace, 400 * static_cast<int>(res.params.size()),
                o.ftol);
    res.converged = true;
    res.message = stalled ? "simplex fallback after stalled LM" : "simplex fallback after LM iteration cap";
  } else if (!res.converged) {
    res.message = "no convergence within iteration budget";
  }

  finalize(prob, res);
  return res;
}

FitResult bootstrap_errors(const ParametricModel& m, const FitData& d, int n_resamples,
                           uint64_t seed, const FitOptions& o) {
  if (n_resamples < 100) throw std::invalid_argument("bootstrap_errors: need >= 100 resamples");
  FitResult base = least_squares_fit(m, d, o);
  const std::size_t n = d.y.size(), k = base.params.size();

  std::vector<std::vector<double>> samples(static_cast<std::size_t>(n_resamples));
  parallel_for(static_cast<std::size_t>(n_resamples), o.threads, [&](std::size_t rix) {
    auto rng = make_rng(seed, rix);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    FitData rd;
    rd.x.resize(n);
    rd.y.resize(n);
    if (!d.sigma.empty()) rd.sigma.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = pick(rng);
      rd.x[i] = d.x[j];
      rd.y[i] = d.y[j];
      if (!d.sigma.empty()) rd.sigma[i] = d.sigma[j];
    }
    ParametricModel warm = m;
    warm.init = base.params;
    FitOptions bo = o;
    bo.threads = 1;
    FitResult r = least_squares_fit(warm, rd, bo);
    samples[rix] = r.params;
  });

  base.bootstrap_params = samples;
  base.ci_lower.assign(k, 0.0);
  base.ci_upper.assign(k, 0.0);
  std::vector<double> column(samples.size());
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < samples.size(); ++i) column[i] = samples[i][j];
    std::sort(column.begin(), column.end());
    auto pct = [&](double q) {
      const double pos = q * (static_cast<double>(column.size()) - 1.0);
      const std::size_t i0 = static_cast<std::size_t>(pos);
      const std::size_t i1 = std::min(i0 + 1, column.size() - 1);
      const double w = pos - static_cast<double>(i0);
      return column[i0] * (1.0 - w) + column[i1] * w;
    };
    base.ci_lower[j] = pct(0.158655);
    base.ci_upper[j] = pct(0.841345);
  }
  return base;
}

PeakEstimate estimate_peak(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 5) throw std::invalid_argument("estimate_peak: need >= 5 points");
  const std::size_t n = x.size();
  std::vector<double> s(n);
  s[0] = y[0];
  s[n - 1] = y[n - 1];
  for (std::size_t i = 1; i + 1 < n; ++i) s[i] = (y[i - 1] + y[i] + y[i + 1]) / 3.0;

  std::size_t imax = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (s[i] > s[imax]) imax = i;

  PeakEstimate est;
  est.x0 = x[imax];
  est.height = s[imax];
  const double half = est.height / 2.0;

  double right = x[n - 1] - x[imax];
  for (std::size_t i = imax; i + 1 < n; ++i) {
    if (s[i + 1] <= half) {
      const double t = (s[i] - half) / (s[i] - s[i + 1]);
      right = x[i] + t * (x[i + 1] - x[i]) - est.x0;
      break;
    }
  }
  double left = x[imax] - x[0];
  for (std::size_t i = imax; i > 0; --i) {
    if (s[i - 1] <= half) {
      const double t = (s[i] - half) / (s[i] - s[i - 1]);
      left = est.x0 - (x[i] - t * (x[i] - x[i - 1]));
      break;
    }
  }
  est.half_width = 0.5 * (left + right);
  if (!(est.half_width > 0.0)) est.half_width = (x[n - 1] - x[0]) / 4.0;
  return est;
}

}  // namespace cqed
