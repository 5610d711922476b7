#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"
#include "swarm/alloc/allocation_learner.hpp"
#include "swarm/ensemble/ensemble.hpp"
#include "swarm/interaction/interaction.hpp"
#include "swarm/plan/maddpg.hpp"
#include "swarm/sim/arena.hpp"

namespace swarm::train {

inline constexpr int kConfigVersion = 1;

struct TrainConfig {
  int pretrain_upper_episodes = 300;  // E_p,u
  int pretrain_lower_episodes = 20;   // E_p,l
  int cross_episodes = 60;            // E_c
  int instance_pool = 100;
  std::uint64_t seed = 1;

  alloc::DqnConfig upper;
  // r_path is about -25 per step, so Q sits near -2500 unscaled; 0.01 keeps it
  // within reach of Adam steps at lr 1e-3.
  plan::MaddpgConfig lower{.reward_scale = 0.01};
  ensemble::EnsembleConfig model;
  plan::RewardConstants reward;
  double omega1 = 0.5;

  // Exploration schedules.
  double eps_start = 1.0;
  double eps_end = 0.05;
  double cross_eps = 0.05;
  double noise_start = 0.3;
  double noise_end = 0.05;

  // Reward scales per phase (the upper reward changes units between phases).
  double pretrain_upper_scale = 1.0;
  double cross_upper_scale = 1e-3;

  int lower_update_every = 1;
  int upper_updates_per_round = 0;  // 0 means one per decision in the round
  int model_updates_per_round = 5;

  int fixed_h = 0;  // 0 = adaptive
  bool disable_imve = false;
  bool skip_upper_pretrain = false;
  bool skip_lower_pretrain = false;
};

struct EvalConfig {
  int instances = 50;
  std::uint64_t seed = 1000;
};

struct ExperimentConfig {
  std::string scenario = "V3";
  ArenaConfig arena;
  TrainConfig train;
  interaction::InteractionParams interaction;
  EvalConfig eval;

  void validate() const;
};

/// Arena preset for "V<n>" (n pursuers vs n evaders) with an optional
/// obstacle suffix "-O<k>". V3 defaults to two obstacles, larger presets to four.
ArenaConfig scenario_preset(const std::string& name);

/// Defaults for a scenario, before any file overrides.
ExperimentConfig default_config(const std::string& scenario = "V3");

/// Parses and validates. Unknown keys and a missing or wrong version are
/// Error(Config).
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
nlohmann::json to_json(const ExperimentConfig& c);

/// Stable FNV-1a hash of the canonical JSON dump, as 16 hex digits.
std::string config_hash(const ExperimentConfig& c);

}  // namespace swarm::train
