#pragma once

#include <cstdint>
#include <vector>

#include "cqed/master_equation.hpp"

namespace cqed {

enum class ClickChannel : std::uint8_t { cavity = 0, free_space = 1 };

struct ClickRecord {
  double time = 0.0;  // seconds from the start of the recorded window
  ClickChannel channel = ClickChannel::cavity;
  std::uint32_t trajectory = 0;
  std::uint64_t seed = 0;
};

struct TrajectoryOptions {
  double duration = 0.0;   // recorded window per trajectory, after burn_in
  int n_traj = 1;
  std::uint64_t seed = 0;
  double burn_in = 0.0;    // discarded lead-in (clicks dropped, times shifted)
  double tick = 81e-12;    // jump-time resolution
  int threads = 0;
  Vector initial;          // empty -> ground[0] x vacuum
};

// Quantum-jump unraveling of the Lindblad dynamics. Between jumps the state
// is propagated with cached powers exp(-i H_eff tick)^(2^k), so steps are
// exact and the jump time is bisected to one tick. One RNG stream per
// trajectory from (seed, trajectory id); output identical for any thread
// count.
std::vector<std::vector<ClickRecord>> mcwf_trajectories(const AtomCavitySystem& sys,
                                                        const TrajectoryOptions& opt);

// Convenience: all clicks of one channel pooled across trajectories, sorted
// by (trajectory, time). Total observed time is n_traj * duration.
std::vector<double> pooled_click_times(const std::vector<std::vector<ClickRecord>>& trajs,
                                       ClickChannel channel);

// Lays the trajectories end to end (trajectory i shifted by i*duration) so
// correlation estimators can treat the result as one long stationary record.
std::vector<double> concatenated_click_times(const std::vector<std::vector<ClickRecord>>& trajs,
                                             ClickChannel channel, double duration);

}  // namespace cqed
