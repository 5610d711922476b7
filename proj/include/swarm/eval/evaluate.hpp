#pragma once

#include <string>
#include <vector>

#include "swarm/train/trainer.hpp"

namespace swarm::eval {

enum class AllocationPolicy { Trained, Random };

/// Read-only view of trained networks arranged for one arena. Actors are
/// indexed by pursuer of the target arena.
struct Deployment {
  const alloc::AllocationLearner* upper = nullptr;
  std::vector<const nn::Mlp*> actors;
  const ensemble::TransitionModel* model = nullptr;
  interaction::InteractionParams params;
  int fixed_h = 0;
  AllocationPolicy policy = AllocationPolicy::Trained;
  double omega1 = 0.5;
  plan::RewardConstants reward;
};

/// Actor index of the trained swarm used for pursuer i of the target swarm:
/// identity at equal size, otherwise the lowest trained pursuer of the same
/// ability class, or of the nearest class when none was trained.
int actor_source(int pursuer, int trained_pursuers, int ability_classes);

Deployment deploy(const train::Trainer& trained, const ArenaConfig& target,
                  AllocationPolicy policy = AllocationPolicy::Trained);

/// Evaluation instance k is generated from derive_seed(seed, k).
std::uint64_t eval_instance_seed(std::uint64_t seed, int k);

/// Greedy rollout: epsilon 0, no actor noise. The random policy draws from a
/// stream derived from `instance_seed`.
train::EpisodeResult run_deployed(const Arena& arena, const WorldState& start,
                                  const Deployment& d, std::uint64_t instance_seed,
                                  TrajectoryWriter* trajectory = nullptr);

struct EvalRow {
  int instance = 0;
  std::uint64_t seed = 0;
  double upper_return = 0.0;
  bool win = false;
  int captured = 0;
  int reached = 0;
  int steps = 0;
  double decision_ms = 0.0;
};

struct EvalReport {
  std::string label;
  std::vector<EvalRow> rows;

  double mean_return() const;
  double mean_decision_ms() const;
  double win_rate() const;  // percent
};

/// Runs `instances` evaluation instances, in parallel when hardware allows.
EvalReport evaluate(const Arena& arena, const Deployment& d, std::uint64_t seed, int instances,
                    const std::string& label);

/// eval_report.csv and eval_report.json (deterministic) plus decision_time.csv.
void write_report(const EvalReport& report, const std::string& dir);

}  // namespace swarm::eval
