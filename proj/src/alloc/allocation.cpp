#include "swarm/alloc/allocation.hpp"

#include <cmath>

#include "swarm/core/error.hpp"

namespace swarm::alloc {

double capture_prob(double capture_radius, const Vec2& pursuer, const Vec2& evader) {
  return capture_radius / (capture_radius + distance(pursuer, evader));
}

double joint_capture_prob(std::span<const double> probs) {
  double miss = 1.0;
  for (double q : probs) miss *= (1.0 - q);
  return 1.0 - miss;
}

double joint_capture_prob(const WorldState& world, const AllocationMatrix& alloc, int j) {
  const Evader& e = world.evaders[static_cast<std::size_t>(j)];
  double miss = 1.0;
  for (int i = 0; i < alloc.rows(); ++i) {
    if (!alloc.at(i, j)) continue;
    const Pursuer& p = world.pursuers[static_cast<std::size_t>(i)];
    miss *= (1.0 - capture_prob(p.capture_radius, p.p, e.p));
  }
  return 1.0 - miss;
}

double effectiveness(const WorldState& world, const AllocationMatrix& alloc) {
  double total = 0.0;
  for (std::size_t j = 0; j < world.evaders.size(); ++j) {
    const Evader& e = world.evaders[j];
    if (!e.active()) continue;
    total += joint_capture_prob(world, alloc, static_cast<int>(j)) * e.vmax;
  }
  return total;
}

AllocRewardParts alloc_rewards(double e_prev, double e_new, double e_final, int decisions,
                               bool round_complete, double omega1) {
  AllocRewardParts r;
  r.local = e_new - e_prev;
  r.global = (round_complete && decisions > 0) ? e_final / decisions : 0.0;
  r.total = omega1 * r.local + (1.0 - omega1) * r.global;
  return r;
}

AllocRewardParts alloc_rewards(const WorldState& world, const AllocationMatrix& prev,
                               const AllocationMatrix& next, const AllocationMatrix& final_alloc,
                               int decisions, double omega1) {
  return alloc_rewards(effectiveness(world, prev), effectiveness(world, next),
                       effectiveness(world, final_alloc), decisions, true, omega1);
}

nn::Vector encode_candidate(const ArenaConfig& config, const WorldState& world,
                            const AllocationMatrix& alloc, int pursuer, int evader) {
  const Pursuer& p = world.pursuers[static_cast<std::size_t>(pursuer)];
  const Evader& e = world.evaders[static_cast<std::size_t>(evader)];
  nn::Vector f(kCandidateWidth);
  const Vec2 rel = e.p - p.p;
  const Vec2 rel_v = e.v - p.v;
  f[feature::kRelX] = rel.x / config.length;
  f[feature::kRelY] = rel.y / config.length;
  f[feature::kRelVx] = rel_v.x;
  f[feature::kRelVy] = rel_v.y;
  f[feature::kCaptureRadius] = p.capture_radius;
  f[feature::kPursuerVmax] = p.vmax;
  f[feature::kEvaderVmax] = e.vmax;
  f[feature::kJointProb] = joint_capture_prob(world, alloc, evader);
  f[feature::kAssigned] = alloc.column_count(evader);
  return f;
}

std::vector<int> active_evaders(const WorldState& world) {
  std::vector<int> out;
  for (std::size_t j = 0; j < world.evaders.size(); ++j)
    if (world.evaders[j].active()) out.push_back(static_cast<int>(j));
  return out;
}

CandidateSet build_candidates(const ArenaConfig& config, const WorldState& world,
                              const AllocationMatrix& alloc, int pursuer) {
  CandidateSet set;
  set.evaders = active_evaders(world);
  set.features.resize(kCandidateWidth, static_cast<Eigen::Index>(set.evaders.size()));
  for (std::size_t k = 0; k < set.evaders.size(); ++k)
    set.features.col(static_cast<Eigen::Index>(k)) =
        encode_candidate(config, world, alloc, pursuer, set.evaders[k]);
  return set;
}

AllocationRound run_allocation_round(const ArenaConfig& config, const WorldState& world,
                                     double omega1, const CandidateChooser& choose) {
  AllocationRound round;
  round.allocation = AllocationMatrix(static_cast<int>(world.pursuers.size()),
                                      static_cast<int>(world.evaders.size()));
  if (active_evaders(world).empty()) return round;

  double e_current = 0.0;
  for (std::size_t i = 0; i < world.pursuers.size(); ++i) {
    if (world.pursuers[i].frozen) continue;
    const int pursuer = static_cast<int>(i);
    AllocationDecision d;
    d.pursuer = pursuer;
    d.candidates = build_candidates(config, world, round.allocation, pursuer);
    d.choice = choose(d.candidates, pursuer);
    if (d.choice < 0 || d.choice >= d.candidates.size())
      throw Error(ErrorKind::Config, "allocation chooser returned an invalid candidate");
    d.evader = d.candidates.evaders[static_cast<std::size_t>(d.choice)];
    d.e_prev = e_current;
    round.allocation.assign(pursuer, d.evader);
    e_current = effectiveness(world, round.allocation);
    d.e_new = e_current;
    round.decisions.push_back(std::move(d));
  }
  round.e_final = e_current;
  const int n = static_cast<int>(round.decisions.size());
  for (AllocationDecision& d : round.decisions)
    d.reward = alloc_rewards(d.e_prev, d.e_new, round.e_final, n, true, omega1);
  return round;
}

int greedy_capture_choice(const CandidateSet& candidates, double length) {
  int best = 0;
  double best_q = -1.0;
  for (int k = 0; k < candidates.size(); ++k) {
    const auto f = candidates.features.col(k);
    const double d = length * std::hypot(f[feature::kRelX], f[feature::kRelY]);
    const double rho = f[feature::kCaptureRadius];
    const double q = rho / (rho + d);
    if (q > best_q) {
      best_q = q;
      best = k;
    }
  }
  return best;
}

}  // namespace swarm::alloc
