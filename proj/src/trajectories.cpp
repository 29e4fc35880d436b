#include "cqed/trajectories.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <unsupported/Eigen/MatrixFunctions>

#include "cqed/parallel.hpp"
#include "cqed/rng.hpp"

namespace cqed {

namespace {

struct PropagatorLadder {
  std::vector<Matrix> u;  // u[k] = exp(-i H_eff tick)^(2^k)
  Matrix u_half;          // exp(-i H_eff tick / 2), for mid-tick jump insertion
  int top() const { return static_cast<int>(u.size()) - 1; }
};

PropagatorLadder build_ladder(const Matrix& h_eff, double tick, std::uint64_t total_ticks) {
  PropagatorLadder l;
  const Matrix gen = std::complex<double>(0.0, -0.5) * h_eff * tick;
  l.u_half = gen.exp();
  l.u.push_back(l.u_half * l.u_half);
  while ((std::uint64_t(1) << l.u.size()) <= total_ticks && l.u.size() < 48)
    l.u.push_back(l.u.back() * l.u.back());
  return l;
}

}  // namespace

std::vector<std::vector<ClickRecord>> mcwf_trajectories(const AtomCavitySystem& sys,
                                                        const TrajectoryOptions& opt) {
  if (opt.tick <= 0.0) throw std::invalid_argument("mcwf: tick must be > 0");
  if (opt.duration < opt.tick) throw std::invalid_argument("mcwf: duration shorter than one tick");
  if (opt.n_traj < 1) throw std::invalid_argument("mcwf: n_traj must be >= 1");

  const Matrix h = sys.hamiltonian();
  const std::vector<Matrix> jumps = sys.jumps();
  Matrix h_eff = h;
  for (const Matrix& j : jumps) h_eff -= std::complex<double>(0.0, 0.5) * (j.adjoint() * j);

  const std::uint64_t total_ticks =
      static_cast<std::uint64_t>(std::llround((opt.burn_in + opt.duration) / opt.tick));
  const std::uint64_t burn_ticks =
      static_cast<std::uint64_t>(std::llround(opt.burn_in / opt.tick));
  const PropagatorLadder ladder = build_ladder(h_eff, opt.tick, total_ticks);

  Vector psi0 = opt.initial;
  if (psi0.size() == 0) {
    psi0 = Vector::Zero(h.rows());
    psi0(0) = 1.0;  // ground[0] x vacuum under the basis ordering
  } else if (psi0.size() != h.rows()) {
    throw std::invalid_argument("mcwf: initial state dimension mismatch");
  } else {
    psi0.normalize();
  }

  std::vector<std::vector<ClickRecord>> out(opt.n_traj);
  parallel_for(static_cast<std::size_t>(opt.n_traj), opt.threads, [&](std::size_t tj) {
    auto rng = make_rng(opt.seed, tj);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    auto draw_target = [&] {
      double u = uni(rng);
      while (u <= 0.0) u = uni(rng);
      return u;
    };

    Vector psi = psi0;
    std::vector<ClickRecord>& clicks = out[tj];
    double target = draw_target();
    std::uint64_t t = 0;

    while (t < total_ticks) {
      const std::uint64_t remaining = total_ticks - t;
      bool advanced = false;
      for (int k = ladder.top(); k >= 0; --k) {
        const std::uint64_t span = std::uint64_t(1) << k;
        if (span > remaining) continue;
        Vector cand = ladder.u[k] * psi;
        if (cand.squaredNorm() > target) {
          psi.swap(cand);
          t += span;
          advanced = true;
          break;
        }
      }
      if (advanced) continue;

      // even one tick crosses the target: a jump happens inside it. Insert
      // it at mid-tick so the pre/post evolution mismatch cancels to first
      // order in tick; the click itself is still stamped on the tick grid.
      psi = ladder.u_half * psi;
      t += 1;

      double wsum = 0.0;
      std::vector<double> w(jumps.size());
      for (std::size_t k = 0; k < jumps.size(); ++k) {
        w[k] = (jumps[k] * psi).squaredNorm();
        wsum += w[k];
      }
      std::size_t pick = jumps.size() - 1;
      if (wsum > 0.0) {
        double x = uni(rng) * wsum;
        for (std::size_t k = 0; k < jumps.size(); ++k) {
          if (x < w[k]) {
            pick = k;
            break;
          }
          x -= w[k];
        }
      }
      psi = ladder.u_half * (jumps[pick] * psi);
      const double nrm = psi.norm();
      if (nrm == 0.0) throw std::runtime_error("mcwf: jump annihilated the state");
      psi /= nrm;
      target = draw_target();

      if (t >= burn_ticks) {
        ClickRecord c;
        c.time = static_cast<double>(t - burn_ticks) * opt.tick;
        c.channel = pick == 0 ? ClickChannel::cavity : ClickChannel::free_space;
        c.trajectory = static_cast<std::uint32_t>(tj);
        c.seed = opt.seed;
        clicks.push_back(c);
      }
    }
  });
  return out;
}

std::vector<double> pooled_click_times(const std::vector<std::vector<ClickRecord>>& trajs,
                                       ClickChannel channel) {
  std::vector<double> times;
  for (const auto& tr : trajs)
    for (const auto& c : tr)
      if (c.channel == channel) times.push_back(c.time);
  return times;
}

std::vector<double> concatenated_click_times(const std::vector<std::vector<ClickRecord>>& trajs,
                                             ClickChannel channel, double duration) {
  std::vector<double> times;
  for (std::size_t i = 0; i < trajs.size(); ++i)
    for (const auto& c : trajs[i])
      if (c.channel == channel) times.push_back(c.time + static_cast<double>(i) * duration);
  return times;
}

}  // namespace cqed
