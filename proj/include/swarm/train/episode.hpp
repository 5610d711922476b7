#pragma once

#include <functional>
#include <vector>

#include "swarm/alloc/allocation.hpp"
#include "swarm/plan/maddpg.hpp"
#include "swarm/sim/arena.hpp"
#include "swarm/sim/trajectory.hpp"

namespace swarm::train {

/// Everything known about one interaction (allocation round plus the env
/// steps executed under it) when it closes.
struct InteractionRecord {
  int t0 = 0;
  int h = 0;     // planned interaction step
  int span = 0;  // env steps actually executed (< h when the episode ends)
  double v_hat = 0.0;
  int n = 1;
  alloc::AllocationRound round;
  nn::Vector summary;       // after allocation, at t0
  nn::Vector next_summary;  // at t0 + span, under the same allocation
  double path_sum = 0.0;    // team sum of r_path over the span
  int captures = 0;         // evaders captured during the span
  std::vector<double> total_rewards;  // one per decision
  bool done = false;
  /// Candidate set of the first decision of the next round (empty when done).
  nn::Matrix next_candidates;

  double mean_alloc_reward() const;
  /// span * mean(r_allo) + path_sum + captures.
  double upper_return() const;
};

struct StepPlan {
  int h = 1;
  double v_hat = 0.0;
  int n = 1;
};

struct EpisodeHooks {
  alloc::CandidateChooser allocate;
  /// Used for pursuers whose target leaves play mid-interaction; no learning.
  alloc::CandidateChooser reassign;
  std::function<plan::ActorOutput(int pursuer, const nn::Vector& observation)> act;
  std::function<StepPlan(const nn::Vector& summary)> plan_step;
  std::function<void(const plan::LowerTransition&)> on_step;
  std::function<void(InteractionRecord&)> on_interaction;
  TrajectoryWriter* trajectory = nullptr;
};

struct EpisodeResult {
  double upper_return = 0.0;
  double lower_return = 0.0;
  EpisodeOutcome outcome;
  int steps = 0;
  double decision_seconds = 0.0;  // allocation + planning inference only
  int interactions = 0;

  bool win() const { return outcome.winner == Winner::Pursuers; }
};

/// Runs the hierarchical loop from `world` until termination.
EpisodeResult run_episode(const Arena& arena, WorldState world, double omega1,
                          const plan::RewardConstants& reward, EpisodeHooks& hooks);

}  // namespace swarm::train
