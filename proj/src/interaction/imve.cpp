#include "swarm/interaction/imve.hpp"

#include <algorithm>
#include <cmath>

#include "swarm/ensemble/summary.hpp"

namespace swarm::interaction {

nn::Matrix morph_candidates(const nn::Matrix& candidates, const nn::Vector& from,
                            const nn::Vector& to) {
  nn::Matrix out = candidates;
  const double d_from = from[summary::kMeanPursuitDist];
  const double d_to = to[summary::kMeanPursuitDist];
  const double ratio = d_from > 1e-9 ? std::max(d_to, 0.0) / d_from : 1.0;
  out.row(alloc::feature::kRelX) *= ratio;
  out.row(alloc::feature::kRelY) *= ratio;
  const double shift = to[summary::kMeanJointProb] - from[summary::kMeanJointProb];
  out.row(alloc::feature::kJointProb) =
      (out.row(alloc::feature::kJointProb).array() + shift).cwiseMax(0.0).cwiseMin(1.0).matrix();
  return out;
}

namespace {

int greedy_column(const alloc::AllocationLearner& learner, const nn::Matrix& candidates) {
  const nn::Vector q = learner.q_values(candidates);
  int best = 0;
  for (int k = 1; k < q.size(); ++k)
    if (q[k] > q[best]) best = k;
  return best;
}

double target_max(const alloc::AllocationLearner& learner, const nn::Matrix& candidates) {
  if (candidates.cols() == 0) return 0.0;
  return learner.target().forward(candidates).maxCoeff();
}

}  // namespace

RolloutPlan plan_rollout(const alloc::AllocationLearner& learner,
                         const ensemble::TransitionModel& model, const ImveSettings& settings,
                         const alloc::UpperTransition& t) {
  const InteractionParams& p = settings.params;
  const double gamma = learner.config().gamma;
  const bool has_summary = t.summary.size() == kSummaryWidth && t.next_summary.size() == kSummaryWidth;
  auto step_h = [&](double v) { return settings.fixed_h > 0 ? settings.fixed_h : adaptive_H(v, p); };

  RolloutPlan plan;
  double v0 = 0.0;
  if (has_summary) v0 = model.uncertainty(t.summary);
  plan.requested_depth = has_summary ? adaptive_N(v0, p) : 1;
  plan.summaries.push_back(t.summary);
  plan.features.push_back(t.chosen);
  plan.rewards.push_back(learner.scaled(t.reward));
  plan.offsets.push_back(0);
  plan.weights.push_back(has_summary ? sample_weight(v0, p) : 1.0);

  bool terminal = t.terminal || t.next_candidates.cols() == 0;
  nn::Matrix candidates = t.next_candidates;
  if (!terminal && plan.requested_depth > 1) {
    int offset = step_h(v0);
    nn::Vector s = t.next_summary;
    const double phase0 = t.summary[summary::kPhase];
    for (int n = 1; n < plan.requested_depth; ++n) {
      const ensemble::ModelPrediction pred = model.predict(s);
      const double r = learner.scaled(pred.reward);
      if (!std::isfinite(r) || !std::isfinite(pred.uncertainty) || !pred.next_summary.allFinite())
        break;
      const int col = greedy_column(learner, candidates);
      plan.summaries.push_back(s);
      plan.features.push_back(candidates.col(col));
      plan.rewards.push_back(r);
      plan.offsets.push_back(offset);
      plan.weights.push_back(sample_weight(pred.uncertainty, p));
      // Advance to the state after this predicted interaction.
      offset += step_h(pred.uncertainty);
      s = pred.next_summary;
      s[summary::kPhase] = phase0 + static_cast<double>(offset) / settings.episode_len;
      if (s[summary::kPhase] >= 1.0) {
        terminal = true;
        break;
      }
      candidates = morph_candidates(t.next_candidates, t.next_summary, s);
    }
  }
  plan.bootstrap = terminal ? 0.0 : target_max(learner, candidates);

  const int d = plan.depth();
  plan.targets.assign(static_cast<std::size_t>(d), 0.0);
  double acc = plan.bootstrap;
  for (int n = d - 1; n >= 0; --n) {
    acc = plan.rewards[static_cast<std::size_t>(n)] + gamma * acc;
    plan.targets[static_cast<std::size_t>(n)] = acc;
  }
  return plan;
}

alloc::QRegression imve_regression(const alloc::AllocationLearner& learner,
                                   const ensemble::TransitionModel& model,
                                   const ImveSettings& settings,
                                   const std::vector<const alloc::UpperTransition*>& batch,
                                   std::vector<RolloutPlan>* plans) {
  std::vector<RolloutPlan> local;
  Eigen::Index columns = 0;
  for (const alloc::UpperTransition* t : batch) {
    local.push_back(plan_rollout(learner, model, settings, *t));
    columns += local.back().depth();
  }
  alloc::QRegression problem;
  problem.features.resize(alloc::kCandidateWidth, columns);
  problem.targets.resize(columns);
  problem.weights.resize(columns);
  problem.transitions = batch.size();
  Eigen::Index c = 0;
  for (const RolloutPlan& plan : local) {
    for (int n = 0; n < plan.depth(); ++n, ++c) {
      const auto k = static_cast<std::size_t>(n);
      problem.features.col(c) = plan.features[k];
      problem.targets[c] = plan.targets[k];
      problem.weights[c] = plan.weights[k];
    }
  }
  if (plans) *plans = std::move(local);
  return problem;
}

}  // namespace swarm::interaction
