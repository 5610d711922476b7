#include "swarm/ensemble/summary.hpp"

#include <algorithm>
#include <limits>

#include "swarm/alloc/allocation.hpp"

namespace swarm {

nn::Vector global_summary(const ArenaConfig& config, const WorldState& world) {
  const double diag = config.diagonal();
  nn::Vector s = nn::Vector::Zero(kSummaryWidth);
  const std::vector<int> active = alloc::active_evaders(world);

  double sum_pe = 0.0, min_pe = 1.0, sum_po = 0.0, min_po = 1.0;
  int n_active = 0;
  for (std::size_t i = 0; i < world.pursuers.size(); ++i) {
    const Pursuer& p = world.pursuers[i];
    if (p.frozen) continue;
    ++n_active;
    double d_pe = diag;
    const int target = world.allocation.rows() > static_cast<int>(i)
                           ? world.allocation.target_of(static_cast<int>(i))
                           : -1;
    if (target >= 0 && world.evaders[static_cast<std::size_t>(target)].active()) {
      d_pe = distance(p.p, world.evaders[static_cast<std::size_t>(target)].p);
    } else {
      for (int j : active)
        d_pe = std::min(d_pe, distance(p.p, world.evaders[static_cast<std::size_t>(j)].p));
    }
    double d_po = diag;
    for (const Obstacle& o : world.obstacles) d_po = std::min(d_po, distance(p.p, o.p));
    sum_pe += d_pe / diag;
    min_pe = std::min(min_pe, d_pe / diag);
    sum_po += d_po / diag;
    min_po = std::min(min_po, d_po / diag);
  }
  if (n_active > 0) {
    s[summary::kMeanPursuitDist] = sum_pe / n_active;
    s[summary::kMinPursuitDist] = min_pe;
    s[summary::kMeanObstacleDist] = sum_po / n_active;
    s[summary::kMinObstacleDist] = min_po;
  }
  s[summary::kActivePursuers] =
      world.pursuers.empty() ? 0.0 : double(n_active) / double(world.pursuers.size());
  s[summary::kActiveEvaders] =
      world.evaders.empty() ? 0.0 : double(active.size()) / double(world.evaders.size());

  if (!active.empty()) {
    double speed = 0.0, q = 0.0;
    for (int j : active) {
      speed += world.evaders[static_cast<std::size_t>(j)].v.norm();
      if (world.allocation.rows() > 0)
        q += alloc::joint_capture_prob(world, world.allocation, j);
    }
    s[summary::kMeanEvaderSpeed] = speed / double(active.size());
    s[summary::kMeanJointProb] = q / double(active.size());
  }
  if (world.allocation.rows() > 0 && !world.evaders.empty())
    s[summary::kEffectiveness] =
        alloc::effectiveness(world, world.allocation) / double(world.evaders.size());
  s[summary::kPhase] = double(world.t) / double(config.episode_len);
  return s;
}

}  // namespace swarm
