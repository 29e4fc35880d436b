#pragma once

#include "cqed/fit.hpp"
#include "cqed/params.hpp"

namespace cqed {

// amplitude / (1 + (x - center)^2 / half_width^2)
double lorentzian(double x, double amplitude, double center, double half_width);

// Parameters (amplitude, center, half_width); initialized from the smoothed
// peak of the data (avoids the broad/narrow local-minimum pair).
ParametricModel make_lorentzian(const FitData& d);

// A * exp(-(t/tau)^beta), decaying; beta in (0, 2].
double stretched_exponential(double t, double amplitude, double tau, double beta);
ParametricModel make_stretched_exponential(const FitData& d);

// Round-trip loss growth laws. Times in the same unit as tau (days in the
// datasets shipped here).
double loss_exponential(double t, double loss0, double delta_loss, double tau1);
double loss_depletion(double t, double loss0, double delta_loss, double tau2);
ParametricModel make_loss_exponential(const FitData& d);
ParametricModel make_loss_depletion(const FitData& d);

// Loss curve evaluated through the finesse/kappa relations at fixed mirror
// transmissions: F(t) = 2pi/(t_ht + t_lt + loss(t)).
double finesse_from_loss(const CavityGeometry& g, double loss_value);
double kappa_from_loss(const CavityGeometry& g, double loss_value);

}  // namespace cqed
