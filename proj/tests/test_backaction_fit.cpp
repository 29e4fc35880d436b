#include "cqed/backaction_fit.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "cqed/units.hpp"
#include "doctest.h"

using namespace cqed;

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  return v;
}

constexpr double kEta = 0.92;
const double kKappa = rad_from_mhz(25.0);
const double kOffset = -rad_from_mhz(3.0);
const double kDeltaA = -rad_from_mhz(40.0);

BackactionFitConfig base_config() {
  BackactionFitConfig cfg;
  cfg.gamma = rad_from_mhz(3.0326);
  cfg.g_sigma = rad_from_mhz(18.2);
  cfg.nodes = 21;
  cfg.kappa_init = rad_from_mhz(20.0);
  return cfg;
}

// One power with both channels on a shared grid. A second coupling, when
// given, generates the free-space channel only.
BackactionDataset synthetic_power(const BackactionFitConfig& cfg, double g_cav, double g_fs,
                                  int points) {
  BackactionDataset ds;
  ds.delta_a = kDeltaA;
  ds.delta_c_fs = linspace(-rad_from_mhz(120.0), rad_from_mhz(40.0), points);
  ds.delta_c_cav = ds.delta_c_fs;
  ds.cavity = backaction_curves(ds, cfg, kEta, kKappa, kOffset, g_cav).cavity;
  ds.free_space = backaction_curves(ds, cfg, kEta, kKappa, kOffset, g_fs).free_space;
  return ds;
}

}  // namespace

TEST_CASE("joint surface fit recovers a noiseless generating model") {
  BackactionFitConfig cfg = base_config();
  const std::vector<double> g_true = {rad_from_mhz(44.0), rad_from_mhz(40.0), rad_from_mhz(36.0),
                                      rad_from_mhz(31.0)};
  std::vector<BackactionDataset> data;
  for (double g : g_true) data.push_back(synthetic_power(cfg, g, g, 32));

  cfg.g_init = {g_true[0] * 1.15, g_true[1] * 0.9, g_true[2] * 1.1, g_true[3] * 0.85};
  const FitResult res = backaction_surface_fit(data, cfg);

  REQUIRE(res.converged);
  REQUIRE(res.params.size() == 7);
  CHECK(res.chi2 < 1e-10);
  CHECK(res.params[0] == doctest::Approx(kEta).epsilon(1e-6));
  CHECK(res.params[1] == doctest::Approx(kKappa).epsilon(1e-6));
  CHECK(res.params[2] == doctest::Approx(kOffset).epsilon(1e-6));
  for (std::size_t i = 0; i < g_true.size(); ++i)
    CHECK(res.params[3 + i] == doctest::Approx(g_true[i]).epsilon(1e-6));
}

TEST_CASE("bootstrap intervals bracket the generating parameters") {
  BackactionFitConfig cfg = base_config();
  cfg.nodes = 15;
  cfg.kappa_init = rad_from_mhz(21.0);
  const std::vector<double> g_true = {rad_from_mhz(44.0), rad_from_mhz(40.0), rad_from_mhz(36.0),
                                      rad_from_mhz(31.0)};
  std::vector<BackactionDataset> data;
  for (double g : g_true) data.push_back(synthetic_power(cfg, g, g, 24));

  std::mt19937_64 rng(77);
  std::normal_distribution<double> n01;
  for (BackactionDataset& ds : data) {
    ds.free_space_sigma.resize(ds.free_space.size());
    ds.cavity_sigma.resize(ds.cavity.size());
    for (std::size_t j = 0; j < ds.free_space.size(); ++j) {
      ds.free_space_sigma[j] = 0.02 * ds.free_space[j];
      ds.free_space[j] += ds.free_space_sigma[j] * n01(rng);
    }
    for (std::size_t j = 0; j < ds.cavity.size(); ++j) {
      ds.cavity_sigma[j] = 0.02 * ds.cavity[j];
      ds.cavity[j] += ds.cavity_sigma[j] * n01(rng);
    }
  }

  cfg.g_init = {g_true[0] * 1.1, g_true[1] * 0.92, g_true[2] * 1.08, g_true[3] * 0.9};
  cfg.bootstrap = 120;
  cfg.seed = 9001;
  cfg.options.threads = 8;
  const FitResult res = backaction_surface_fit(data, cfg);

  REQUIRE(res.converged);
  REQUIRE(res.bootstrap_params.size() == 120);
  CHECK(res.chi2_per_dof > 0.4);
  CHECK(res.chi2_per_dof < 2.0);

  CHECK(res.params[0] == doctest::Approx(kEta).epsilon(0.05));
  CHECK(res.params[1] == doctest::Approx(kKappa).epsilon(0.05));
  CHECK(std::abs(res.params[2] - kOffset) < rad_from_mhz(1.0));
  for (std::size_t i = 0; i < g_true.size(); ++i)
    CHECK(res.params[3 + i] == doctest::Approx(g_true[i]).epsilon(0.05));

  // Joint containment is checked at 95% per parameter: with seven parameters
  // the 68% bands the result reports would jointly miss most of the time.
  const std::vector<double> truth = {kEta,      kKappa,    kOffset,  g_true[0],
                                     g_true[1], g_true[2], g_true[3]};
  std::vector<double> column(res.bootstrap_params.size());
  for (std::size_t j = 0; j < truth.size(); ++j) {
    for (std::size_t i = 0; i < column.size(); ++i) column[i] = res.bootstrap_params[i][j];
    std::sort(column.begin(), column.end());
    const double lo = column[static_cast<std::size_t>(0.025 * (column.size() - 1))];
    const double hi = column[static_cast<std::size_t>(std::ceil(0.975 * (column.size() - 1)))];
    CHECK(lo <= truth[j]);
    CHECK(truth[j] <= hi);
  }

  // One power alone leaves the shared linewidth much less constrained.
  BackactionFitConfig solo_cfg = cfg;
  solo_cfg.g_init = {cfg.g_init[0]};
  const FitResult solo = backaction_surface_fit({data[0]}, solo_cfg);
  REQUIRE(solo.converged);
  const double solo_width = solo.ci_upper[1] - solo.ci_lower[1];
  const double joint_width = res.ci_upper[1] - res.ci_lower[1];
  CHECK(solo_width > joint_width);
}

TEST_CASE("channel-restricted fits resolve channel-specific couplings") {
  BackactionFitConfig cfg = base_config();
  const double c_gen = 12.6 / (0.95 * 0.95);
  const double g_gen = std::sqrt(2.0 * c_gen * kKappa * cfg.gamma);
  const std::vector<double> powers = {1.0, 0.85};

  // The cavity channel is generated a shade stronger-coupled than the
  // free-space channel sees.
  std::vector<BackactionDataset> cav_only, fs_only;
  for (double s : powers) {
    BackactionDataset full = synthetic_power(cfg, 0.95 * s * g_gen, 0.89 * s * g_gen, 32);
    BackactionDataset c, f;
    c.delta_a = f.delta_a = full.delta_a;
    c.delta_c_cav = full.delta_c_cav;
    c.cavity = full.cavity;
    f.delta_c_fs = full.delta_c_fs;
    f.free_space = full.free_space;
    cav_only.push_back(c);
    fs_only.push_back(f);
  }

  cfg.g_init = {g_gen, 0.85 * g_gen};
  const FitResult rc = backaction_surface_fit(cav_only, cfg);
  const FitResult rf = backaction_surface_fit(fs_only, cfg);
  REQUIRE(rc.converged);
  REQUIRE(rf.converged);
  REQUIRE(rc.params.size() == 4);  // no eta_fs without free-space points
  REQUIRE(rf.params.size() == 5);

  auto coop = [&](double g, double kappa) { return g * g / (2.0 * kappa * cfg.gamma); };
  const double c_cav = coop(rc.params[2], rc.params[0]);
  const double c_fs = coop(rf.params[3], rf.params[1]);
  CHECK(c_cav == doctest::Approx(12.6).epsilon(1e-3));
  CHECK(c_fs == doctest::Approx(0.89 * 0.89 * c_gen).epsilon(1e-3));
  CHECK(c_cav / c_fs == doctest::Approx((0.95 * 0.95) / (0.89 * 0.89)).epsilon(1e-4));
  CHECK(c_cav - c_fs > 1.0);
}

TEST_CASE("surface fit rejects malformed and under-determined input") {
  BackactionFitConfig cfg = base_config();
  CHECK_THROWS_AS(backaction_surface_fit({}, cfg), std::invalid_argument);

  BackactionDataset ds = synthetic_power(cfg, rad_from_mhz(40.0), rad_from_mhz(40.0), 16);

  BackactionFitConfig bad = cfg;
  bad.gamma = 0.0;
  CHECK_THROWS_AS(backaction_surface_fit({ds}, bad), std::invalid_argument);
  bad = cfg;
  bad.kappa_init = 0.0;
  CHECK_THROWS_AS(backaction_surface_fit({ds}, bad), std::invalid_argument);
  bad = cfg;
  bad.g_init = {rad_from_mhz(40.0), rad_from_mhz(40.0)};  // two seeds, one dataset
  CHECK_THROWS_AS(backaction_surface_fit({ds}, bad), std::invalid_argument);

  BackactionDataset ragged = ds;
  ragged.free_space.pop_back();
  CHECK_THROWS_AS(backaction_surface_fit({ragged}, cfg), std::invalid_argument);
  ragged = ds;
  ragged.cavity_sigma.assign(3, 0.1);
  CHECK_THROWS_AS(backaction_surface_fit({ragged}, cfg), std::invalid_argument);

  CHECK_THROWS_AS(backaction_surface_fit({BackactionDataset{}}, cfg), std::invalid_argument);

  // three cavity points cannot fix kappa, offset and one coupling
  BackactionDataset tiny;
  tiny.delta_a = kDeltaA;
  tiny.delta_c_cav = {ds.delta_c_cav[0], ds.delta_c_cav[5], ds.delta_c_cav[10]};
  tiny.cavity = {ds.cavity[0], ds.cavity[5], ds.cavity[10]};
  BackactionFitConfig tiny_cfg = cfg;
  tiny_cfg.g_init = {rad_from_mhz(40.0)};
  CHECK_THROWS_AS(backaction_surface_fit({tiny}, tiny_cfg), std::invalid_argument);
}

TEST_CASE("uniform weighting and data-driven seeds still land on the model") {
  BackactionFitConfig cfg = base_config();
  const double g0 = rad_from_mhz(44.0), g1 = rad_from_mhz(37.0);
  BackactionDataset both = synthetic_power(cfg, g0, g0, 28);
  BackactionDataset full1 = synthetic_power(cfg, g1, g1, 28);
  BackactionDataset dim;  // weaker power seen only in free space
  dim.delta_a = full1.delta_a;
  dim.delta_c_fs = full1.delta_c_fs;
  dim.free_space = full1.free_space;

  cfg.weighted = false;  // g_init left empty: seeds come from the curves
  const FitResult res = backaction_surface_fit({both, dim}, cfg);
  REQUIRE(res.converged);
  REQUIRE(res.params.size() == 5);
  CHECK(res.params[0] == doctest::Approx(kEta).epsilon(1e-5));
  CHECK(res.params[1] == doctest::Approx(kKappa).epsilon(1e-5));
  CHECK(res.params[3] == doctest::Approx(g0).epsilon(1e-5));
  CHECK(res.params[4] == doctest::Approx(g1).epsilon(1e-5));
}
