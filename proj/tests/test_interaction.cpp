#include <gtest/gtest.h>

#include "oracles.hpp"
#include "swarm/core/error.hpp"
#include "swarm/ensemble/summary.hpp"
#include "swarm/interaction/imve.hpp"
#include "swarm/interaction/interaction.hpp"

namespace swarm::interaction {
namespace {

TEST(AdaptiveH, Examples) {
  const InteractionParams p;
  EXPECT_EQ(adaptive_H(0.0, p), 19);
  EXPECT_EQ(adaptive_H(0.35, p), 15);
  EXPECT_EQ(adaptive_H(1e9, p), 10);
  EXPECT_EQ(adaptive_H(1e300, p), 10);
}

TEST(AdaptiveN, Examples) {
  const InteractionParams p;
  EXPECT_EQ(adaptive_N(0.0, p), 3);
  EXPECT_EQ(adaptive_N(0.25, p), 1);
  EXPECT_EQ(adaptive_N(1e9, p), 1);
}

TEST(SampleWeight, Examples) {
  const InteractionParams p;
  EXPECT_EQ(sample_weight(0.0, p), 1.0);
  EXPECT_NEAR(sample_weight(0.2, p), 0.6, 1e-15);
  EXPECT_EQ(sample_weight(1e9, p), 0.2);
}

TEST(Adaptive, ClampedAndMonotoneOnGrid) {
  const InteractionParams p;
  int h_prev = 1 << 30, n_prev = 1 << 30;
  double w_prev = 2.0;
  for (int k = 0; k < 10000; ++k) {
    const double v = 3.0 * k / 9999.0;
    const int h = adaptive_H(v, p), n = adaptive_N(v, p);
    const double w = sample_weight(v, p);
    EXPECT_GE(h, p.h_min);
    EXPECT_LE(h, p.h_max);
    EXPECT_GE(n, 1);
    EXPECT_LE(n, p.n_max);
    EXPECT_GE(w, p.w_min);
    EXPECT_LE(w, 1.0);
    EXPECT_LE(h, h_prev);
    EXPECT_LE(n, n_prev);
    EXPECT_LE(w, w_prev);
    h_prev = h;
    n_prev = n;
    w_prev = w;
  }
}

TEST(Params, Validation) {
  InteractionParams p;
  EXPECT_NO_THROW(p.validate());
  p.h_min = 21;
  EXPECT_THROW(p.validate(), Error);
  p = InteractionParams{};
  p.n_base = 0;
  EXPECT_THROW(p.validate(), Error);
  p = InteractionParams{};
  p.w_min = 0.0;
  EXPECT_THROW(p.validate(), Error);
}

TEST(TotalReward, ExamplesAndLinearity) {
  EXPECT_NEAR(total_reward(10, 0.4, -55.0, 2), -49.0, 1e-12);
  EXPECT_NEAR(total_reward(7, 0.3, 0.0, 0), 2.1, 1e-15);
  Rng rng(5);
  for (int k = 0; k < 30; ++k) {
    const int h = 1 + static_cast<int>(rng.index(20));
    const double a = rng.uniform(-1, 1), b = rng.uniform(-1, 1);
    const double pa = rng.uniform(-50, 0), pb = rng.uniform(-50, 0);
    const int ca = static_cast<int>(rng.index(4)), cb = static_cast<int>(rng.index(4));
    EXPECT_NEAR(total_reward(h, a, pa, ca), oracle::total(h, a, pa, ca), 1e-9);
    EXPECT_NEAR(total_reward(h, a + b, pa + pb, ca + cb),
                total_reward(h, a, pa, ca) + total_reward(h, b, pb, cb), 1e-9);
  }
}

// Deterministic model with scripted outputs.
class ScriptedModel : public ensemble::TransitionModel {
 public:
  double reward = 0.5;
  double v = 0.0;
  double drift = 0.0;  // added to the mean pursuit distance each prediction
  int poison_after = -1;
  mutable int calls = 0;

  ensemble::ModelPrediction predict(const nn::Vector& s) const override {
    ensemble::ModelPrediction p;
    p.next_summary = s;
    p.next_summary[summary::kMeanPursuitDist] += drift;
    p.reward = reward;
    p.uncertainty = v;
    if (poison_after >= 0 && calls >= poison_after) p.next_summary[0] = std::nan("");
    ++calls;
    return p;
  }
  double uncertainty(const nn::Vector&) const override { return v; }
};

alloc::DqnConfig tiny() {
  alloc::DqnConfig c;
  c.hidden = {8, 8};
  c.batch = 16;
  return c;
}

alloc::UpperTransition make_transition(Rng& rng, bool terminal = false) {
  alloc::UpperTransition t;
  t.chosen.resize(alloc::kCandidateWidth);
  for (int k = 0; k < alloc::kCandidateWidth; ++k) t.chosen[k] = rng.uniform(-1, 1);
  t.reward = rng.uniform(-1, 1);
  t.next_candidates.resize(alloc::kCandidateWidth, 3);
  for (Eigen::Index k = 0; k < t.next_candidates.size(); ++k)
    t.next_candidates.data()[k] = rng.uniform(0, 1);
  t.terminal = terminal;
  t.summary = nn::Vector::Constant(kSummaryWidth, 0.3);
  t.summary[summary::kPhase] = 0.1;
  t.next_summary = t.summary;
  t.next_summary[summary::kPhase] = 0.15;
  return t;
}

TEST(Imve, DepthOneUnitWeightEqualsDqn) {
  alloc::AllocationLearner learner(tiny(), 4);
  ScriptedModel model;
  ImveSettings s;
  s.params.n_base = 1;
  Rng rng(3);
  std::vector<alloc::UpperTransition> data;
  for (int k = 0; k < 16; ++k) data.push_back(make_transition(rng, k % 5 == 0));
  std::vector<const alloc::UpperTransition*> batch;
  for (const auto& t : data) batch.push_back(&t);
  const auto imve = imve_regression(learner, model, s, batch);
  const auto dqn = learner.dqn_regression(batch);
  EXPECT_TRUE(imve.features == dqn.features);
  EXPECT_TRUE(imve.targets == dqn.targets);
  EXPECT_TRUE(imve.weights == dqn.weights);
  EXPECT_EQ(learner.regression_loss(imve), learner.regression_loss(dqn));
}

TEST(Imve, DepthTwoByHand) {
  alloc::AllocationLearner learner(tiny(), 6);
  ScriptedModel model;
  model.reward = 0.5;
  ImveSettings s;
  s.params.n_base = 2;
  Rng rng(9);
  const alloc::UpperTransition t = make_transition(rng);
  const RolloutPlan plan = plan_rollout(learner, model, s, t);
  ASSERT_EQ(plan.depth(), 2);
  const double g = learner.config().gamma;
  // the predicted summary keeps distances, so candidates are unchanged
  const double boot = learner.target().forward(t.next_candidates).maxCoeff();
  const double y1 = 0.5 + g * boot;
  const double y0 = t.reward + g * y1;
  EXPECT_NEAR(plan.targets[1], y1, 1e-12);
  EXPECT_NEAR(plan.targets[0], y0, 1e-12);
  EXPECT_EQ(plan.offsets, (std::vector<int>{0, 19}));
  const nn::Vector q = learner.q_values(t.next_candidates);
  Eigen::Index best;
  q.maxCoeff(&best);
  EXPECT_TRUE(plan.features[1] == t.next_candidates.col(best));
}

TEST(Imve, ZeroGammaTargetsAreRewards) {
  alloc::DqnConfig c = tiny();
  c.gamma = 0.0;
  alloc::AllocationLearner learner(c, 6);
  ScriptedModel model;
  model.reward = -0.25;
  ImveSettings s;
  s.params.n_base = 3;
  Rng rng(2);
  const alloc::UpperTransition t = make_transition(rng);
  const RolloutPlan plan = plan_rollout(learner, model, s, t);
  ASSERT_EQ(plan.depth(), 3);
  EXPECT_EQ(plan.targets[0], t.reward);
  EXPECT_EQ(plan.targets[1], -0.25);
  EXPECT_EQ(plan.targets[2], -0.25);
}

TEST(Imve, OffsetsIncreaseAndStayBounded) {
  alloc::AllocationLearner learner(tiny(), 6);
  ScriptedModel model;
  model.drift = 0.01;
  Rng rng(2);
  for (double v : {0.0, 0.05, 0.1}) {
    model.v = v;
    ImveSettings s;
    s.params.n_base = 5;
    s.params.omega4 = 0.0;
    alloc::UpperTransition t = make_transition(rng);
    t.summary[summary::kPhase] = 0.0;
    const RolloutPlan plan = plan_rollout(learner, model, s, t);
    EXPECT_EQ(plan.depth(), 5);
    for (int n = 1; n < plan.depth(); ++n)
      EXPECT_GT(plan.offsets[static_cast<std::size_t>(n)], plan.offsets[static_cast<std::size_t>(n - 1)]);
    EXPECT_LE(plan.offsets.back(), plan.depth() * s.params.h_max);
    for (double w : plan.weights) EXPECT_DOUBLE_EQ(w, sample_weight(v, s.params));
  }
}

TEST(Imve, FixedHOffsets) {
  alloc::AllocationLearner learner(tiny(), 6);
  ScriptedModel model;
  ImveSettings s;
  s.params.n_base = 4;
  s.fixed_h = 13;
  Rng rng(2);
  alloc::UpperTransition t = make_transition(rng);
  t.summary[summary::kPhase] = 0.0;
  const RolloutPlan plan = plan_rollout(learner, model, s, t);
  EXPECT_EQ(plan.offsets, (std::vector<int>{0, 13, 26, 39}));
}

TEST(Imve, NonFinitePredictionTruncates) {
  alloc::AllocationLearner learner(tiny(), 6);
  ScriptedModel model;
  model.poison_after = 1;
  ImveSettings s;
  s.params.n_base = 5;
  Rng rng(2);
  const alloc::UpperTransition t = make_transition(rng);
  const RolloutPlan plan = plan_rollout(learner, model, s, t);
  EXPECT_EQ(plan.requested_depth, 5);
  EXPECT_EQ(plan.depth(), 2);
  for (double y : plan.targets) EXPECT_TRUE(std::isfinite(y));
}

TEST(Imve, EpisodeEndMakesRolloutTerminal) {
  alloc::AllocationLearner learner(tiny(), 6);
  ScriptedModel model;
  ImveSettings s;
  s.params.n_base = 5;
  s.episode_len = 300;
  Rng rng(2);
  alloc::UpperTransition t = make_transition(rng);
  t.summary[summary::kPhase] = 0.9;  // 30 steps left: one 19-step hop, then past the end
  const RolloutPlan plan = plan_rollout(learner, model, s, t);
  EXPECT_EQ(plan.depth(), 2);
  EXPECT_EQ(plan.bootstrap, 0.0);
}

TEST(Imve, TerminalTransitionStaysOneStep) {
  alloc::AllocationLearner learner(tiny(), 6);
  ScriptedModel model;
  ImveSettings s;
  Rng rng(2);
  const alloc::UpperTransition t = make_transition(rng, true);
  const RolloutPlan plan = plan_rollout(learner, model, s, t);
  EXPECT_EQ(plan.depth(), 1);
  EXPECT_EQ(plan.targets[0], t.reward);
}

TEST(Imve, MorphScalesDistanceAndShiftsProbability) {
  nn::Matrix cand = nn::Matrix::Constant(alloc::kCandidateWidth, 2, 0.5);
  nn::Vector from = nn::Vector::Constant(kSummaryWidth, 0.2), to = from;
  to[summary::kMeanPursuitDist] = 0.1;
  to[summary::kMeanJointProb] = 0.9;
  const nn::Matrix out = morph_candidates(cand, from, to);
  EXPECT_DOUBLE_EQ(out(alloc::feature::kRelX, 0), 0.25);
  EXPECT_DOUBLE_EQ(out(alloc::feature::kRelY, 1), 0.25);
  EXPECT_DOUBLE_EQ(out(alloc::feature::kJointProb, 0), 1.0);
  EXPECT_DOUBLE_EQ(out(alloc::feature::kCaptureRadius, 0), 0.5);
}

}  // namespace
}  // namespace swarm::interaction
