#include "cqed/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cqed/units.hpp"

namespace cqed {

double lorentzian(double x, double amplitude, double center, double half_width) {
  const double u = (x - center) / half_width;
  return amplitude / (1.0 + u * u);
}

ParametricModel make_lorentzian(const FitData& d) {
  PeakEstimate pk = estimate_peak(d.x, d.y);
  ParametricModel m;
  m.names = {"amplitude", "center", "half_width"};
  m.init = {pk.height, pk.x0, pk.half_width};
  m.lower = {0.0, -std::numeric_limits<double>::infinity(), 0.0};
  m.upper = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
             std::numeric_limits<double>::infinity()};
  m.eval = [](const std::vector<double>& p, double x) { return lorentzian(x, p[0], p[1], p[2]); };
  return m;
}

double stretched_exponential(double t, double amplitude, double tau, double beta) {
  if (t < 0.0) throw std::invalid_argument("stretched_exponential: t must be >= 0");
  if (tau <= 0.0) throw std::invalid_argument("stretched_exponential: tau must be > 0");
  if (beta <= 0.0 || beta > 2.0) throw std::invalid_argument("stretched_exponential: beta must be in (0,2]");
  return amplitude * std::exp(-std::pow(t / tau, beta));
}

ParametricModel make_stretched_exponential(const FitData& d) {
  const double a0 = *std::max_element(d.y.begin(), d.y.end());
  const double span = d.x.back() - d.x.front();
  ParametricModel m;
  m.names = {"amplitude", "tau", "beta"};
  m.init = {a0, std::max(span / 3.0, 1e-12), 1.0};
  m.lower = {0.0, 1e-12, 0.05};
  m.upper = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), 2.0};
  m.eval = [](const std::vector<double>& p, double t) {
    return stretched_exponential(t, p[0], p[1], p[2]);
  };
  return m;
}

double loss_exponential(double t, double loss0, double delta_loss, double tau1) {
  if (tau1 <= 0.0) throw std::invalid_argument("loss_exponential: tau must be > 0");
  return loss0 + delta_loss * std::exp(t / tau1);
}

double loss_depletion(double t, double loss0, double delta_loss, double tau2) {
  if (tau2 <= 0.0) throw std::invalid_argument("loss_depletion: tau must be > 0");
  return loss0 + delta_loss * (1.0 - std::exp(-t / tau2));
}

namespace {
ParametricModel make_loss_common(const FitData& d, bool depletion) {
  const double y0 = d.y.front();
  const double y1 = d.y.back();
  const double span = std::max(d.x.back() - d.x.front(), 1e-12);
  ParametricModel m;
  m.names = {"loss0", "delta_loss", "tau"};
  m.init = {y0, std::max(y1 - y0, 1e-9), span / 2.0};
  m.lower = {0.0, 0.0, 1e-9};
  m.upper = {1.0, 1.0, std::numeric_limits<double>::infinity()};
  if (depletion) {
    m.eval = [](const std::vector<double>& p, double t) { return loss_depletion(t, p[0], p[1], p[2]); };
  } else {
    m.eval = [](const std::vector<double>& p, double t) { return loss_exponential(t, p[0], p[1], p[2]); };
  }
  return m;
}
}  // namespace

ParametricModel make_loss_exponential(const FitData& d) { return make_loss_common(d, false); }
ParametricModel make_loss_depletion(const FitData& d) { return make_loss_common(d, true); }

double finesse_from_loss(const CavityGeometry& g, double loss_value) {
  CavityGeometry gg = g;
  gg.losses = loss_value;
  return finesse(gg);
}

double kappa_from_loss(const CavityGeometry& g, double loss_value) {
  CavityGeometry gg = g;
  gg.losses = loss_value;
  return kappa_from_geometry(gg);
}

}  // namespace cqed
