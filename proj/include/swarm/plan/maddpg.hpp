#pragma once

#include <cstdint>
#include <vector>

#include "swarm/nn/adam.hpp"
#include "swarm/nn/checkpoint.hpp"
#include "swarm/nn/replay_buffer.hpp"
#include "swarm/plan/planning.hpp"

namespace swarm::plan {

/// Joint step of all pursuers. Column i of each matrix belongs to pursuer i;
/// inactive (frozen) pursuers carry zero observations and actions.
struct LowerTransition {
  nn::Matrix obs;        // kObservationWidth x I
  nn::Matrix actions;    // kActionWidth x I, tanh space
  nn::Vector rewards;    // I
  nn::Matrix next_obs;   // kObservationWidth x I
  std::vector<std::uint8_t> active;
  std::vector<std::uint8_t> next_active;
  bool terminal = false;
};

struct MaddpgConfig {
  double lr = 1e-3;
  double gamma = 0.99;
  double zeta = 1e-2;
  std::size_t batch = 1256;
  std::size_t capacity = 500000;
  std::vector<int> hidden{64, 64};
  double reward_scale = 1.0;
  double logit_reg = 1e-3;  // L2 on the actor's pre-tanh outputs, keeps it off the saturated corners
};

struct MaddpgStats {
  bool updated = false;
  std::vector<double> critic_loss;
  std::vector<double> actor_loss;
};

/// Per-pursuer actors over local observations and per-pursuer critics over
/// the joint observation-action vector.
class MaddpgLearner {
 public:
  MaddpgLearner() = default;
  MaddpgLearner(int agents, MaddpgConfig config, std::uint64_t seed);

  int agents() const { return static_cast<int>(actors_.size()); }
  const MaddpgConfig& config() const { return config_; }
  int critic_input_width() const { return agents() * (kObservationWidth + kActionWidth); }

  const nn::Mlp& actor(int i) const { return actors_[static_cast<std::size_t>(i)]; }
  const nn::Mlp& critic(int i) const { return critics_[static_cast<std::size_t>(i)]; }
  nn::Mlp& actor(int i) { return actors_[static_cast<std::size_t>(i)]; }
  nn::Mlp& critic(int i) { return critics_[static_cast<std::size_t>(i)]; }
  const nn::Mlp& target_actor(int i) const { return actor_targets_[static_cast<std::size_t>(i)]; }
  const nn::Mlp& target_critic(int i) const { return critic_targets_[static_cast<std::size_t>(i)]; }
  const std::vector<nn::Mlp>& actors() const { return actors_; }

  void push(LowerTransition transition);
  std::size_t buffer_size() const { return buffer_.size(); }

  /// One update of every critic and actor. No-op until the buffer holds a
  /// full batch.
  MaddpgStats update();
  /// Update on an explicit batch (any size > 0).
  MaddpgStats update_on(const std::vector<const LowerTransition*>& batch);

  /// Critic regression targets for agent i on a batch.
  nn::Vector critic_targets(const std::vector<const LowerTransition*>& batch, int agent) const;

  void save(nn::Checkpoint& ck, const std::string& prefix, bool with_buffer) const;
  void load(const nn::Checkpoint& ck, const std::string& prefix);

 private:
  MaddpgConfig config_;
  std::vector<nn::Mlp> actors_, actor_targets_, critics_, critic_targets_;
  std::vector<nn::Adam> actor_opt_, critic_opt_;
  nn::ReplayBuffer<LowerTransition> buffer_;
};

}  // namespace swarm::plan
