#pragma once

#include <vector>

#include "swarm/alloc/allocation_learner.hpp"
#include "swarm/ensemble/ensemble.hpp"
#include "swarm/interaction/interaction.hpp"

namespace swarm::interaction {

/// One expanded transition. Index 0 is the real decision; later entries
/// come from mean model predictions.
struct RolloutPlan {
  std::vector<nn::Vector> summaries;  // ŝ_{t+H_n}
  std::vector<nn::Vector> features;   // encoding of â_{t+H_n}
  std::vector<double> rewards;        // r̂_{t+n}, already scaled
  std::vector<int> offsets;           // H_n, H_0 = 0
  std::vector<double> weights;        // ω̂ per term
  std::vector<double> targets;        // y_{t+H_n}
  double bootstrap = 0.0;             // max Q⁻ at the end of the rollout (0 if terminal)
  int requested_depth = 1;            // N from adaptive_N

  int depth() const { return static_cast<int>(features.size()); }
};

struct ImveSettings {
  InteractionParams params;
  int episode_len = 300;
  int fixed_h = 0;  // when > 0, H offsets use this constant
};

/// Candidate encodings at a predicted summary, derived from the real
/// candidates observed at `from`: relative positions scale with the mean
/// pursuit distance, joint capture probabilities shift with its mean.
nn::Matrix morph_candidates(const nn::Matrix& candidates, const nn::Vector& from,
                            const nn::Vector& to);

RolloutPlan plan_rollout(const alloc::AllocationLearner& learner,
                         const ensemble::TransitionModel& model, const ImveSettings& settings,
                         const alloc::UpperTransition& t);

/// Weighted multi-step regression over a batch. With N = 1 and unit
/// weights this is exactly AllocationLearner::dqn_regression.
alloc::QRegression imve_regression(const alloc::AllocationLearner& learner,
                                   const ensemble::TransitionModel& model,
                                   const ImveSettings& settings,
                                   const std::vector<const alloc::UpperTransition*>& batch,
                                   std::vector<RolloutPlan>* plans = nullptr);

}  // namespace swarm::interaction
