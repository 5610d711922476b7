#pragma once

#include <cstdint>
#include <vector>

#include "swarm/alloc/allocation.hpp"
#include "swarm/nn/adam.hpp"
#include "swarm/nn/checkpoint.hpp"
#include "swarm/nn/replay_buffer.hpp"

namespace swarm::alloc {

/// One allocation decision as stored for learning. The next state is the
/// candidate set of the following decision (same round, or the first
/// decision of the next round).
struct UpperTransition {
  nn::Vector chosen;            // candidate encoding of the selected evader
  double reward = 0.0;          // static allocation reward or total reward
  nn::Matrix next_candidates;   // kCandidateWidth x k, k may be 0
  bool terminal = false;
  nn::Vector summary;           // pooled global summary at decision time
  nn::Vector next_summary;      // pooled global summary at the next state
};

struct DqnConfig {
  double lr = 1e-4;
  double gamma = 0.95;
  double zeta = 1e-2;
  std::size_t batch = 120;
  std::size_t capacity = 50000;
  std::vector<int> hidden{128, 128};
  /// Rewards are multiplied by this before entering Q targets.
  double reward_scale = 1.0;
};

/// Regression rows for one Q update: each column of `features` is a
/// candidate encoding with its target and weight. The loss is
/// sum(w * (Q - y)^2) / transitions.
struct QRegression {
  nn::Matrix features;
  nn::Vector targets;
  nn::Vector weights;
  std::size_t transitions = 0;
};

/// Double-DQN learner over candidate encodings. Q(s, a) is evaluated on the
/// encoding of the (pursuer, evader) pair, so the same network serves any
/// swarm size.
class AllocationLearner {
 public:
  AllocationLearner() = default;
  AllocationLearner(DqnConfig config, std::uint64_t seed);

  const DqnConfig& config() const { return config_; }
  const nn::Mlp& online() const { return online_; }
  const nn::Mlp& target() const { return target_; }
  nn::Mlp& online() { return online_; }
  nn::Mlp& target() { return target_; }

  nn::Vector q_values(const nn::Matrix& candidates) const;
  /// Column index of the best candidate (lowest index on ties), or an
  /// epsilon-uniform pick.
  int select(const CandidateSet& candidates, double epsilon, Rng& rng) const;

  /// Evader index chosen for pursuer i. Throws Error(RoundComplete) when no
  /// evader is active.
  int select_target(const ArenaConfig& config, const WorldState& world,
                    const AllocationMatrix& alloc, int pursuer, double epsilon, Rng& rng) const;

  void push(UpperTransition transition);
  std::size_t buffer_size() const { return buffer_.size(); }
  const nn::ReplayBuffer<UpperTransition>& buffer() const { return buffer_; }

  /// Draws a training batch (size min(batch, buffer size)).
  std::vector<const UpperTransition*> sample_batch();

  /// max_k Q_target(next_k), or 0 for terminal transitions / empty sets.
  double bootstrap_value(const UpperTransition& t) const;
  double scaled(double reward) const { return reward * config_.reward_scale; }
  void set_reward_scale(double scale) { config_.reward_scale = scale; }
  void clear_buffer() { buffer_.clear(); }

  /// One-step targets y = r + gamma * bootstrap with unit weights.
  QRegression dqn_regression(const std::vector<const UpperTransition*>& batch) const;

  /// Loss of a regression problem under the current online network.
  double regression_loss(const QRegression& problem) const;

  /// One Adam step on the regression loss followed by the soft target
  /// update. Returns the pre-step loss.
  double fit(const QRegression& problem);

  /// Sample, regress on one-step targets, step. No-op (returns 0) when the
  /// buffer is empty.
  double dqn_update();

  void save(nn::Checkpoint& ck, const std::string& prefix, bool with_buffer) const;
  void load(const nn::Checkpoint& ck, const std::string& prefix);

 private:
  DqnConfig config_;
  nn::Mlp online_;
  nn::Mlp target_;
  nn::Adam adam_;
  nn::ReplayBuffer<UpperTransition> buffer_;
};

}  // namespace swarm::alloc
