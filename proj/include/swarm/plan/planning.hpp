#pragma once

#include <vector>

#include "swarm/nn/mlp.hpp"
#include "swarm/sim/arena.hpp"

namespace swarm::plan {

/// Local observation of one pursuer, all relative to itself: assigned
/// evader (pos, vel), nearest unfrozen pursuer neighbour (pos, vel),
/// nearest obstacle (pos, vel), own velocity. Positions are divided by D1.
inline constexpr int kObservationWidth = 14;
inline constexpr int kActionWidth = 2;

/// Relative position used for a neighbour or obstacle that does not exist.
inline constexpr double kAbsentOffset = 1.0;

using PlanAction = PursuerAction;

struct RewardConstants {
  double capture_bonus = 5.0;    // r_a
  double obstacle_penalty = 1.0; // r_b
  double neighbor_penalty = 1.0; // r_c
  double threat_distance = 0.3;  // d_thr, metres
  double omega2 = 0.7;
};

/// Index of the nearest unfrozen pursuer other than i (lowest index on
/// ties), or -1.
int nearest_neighbor(const WorldState& world, int pursuer);
/// Index of the nearest obstacle (lowest index on ties), or -1.
int nearest_obstacle(const WorldState& world, int pursuer);

/// Throws Error(Unassigned) when pursuer i has no allocated evader.
nn::Vector build_observation(const ArenaConfig& config, const WorldState& world, int pursuer);

/// -d / rho_c, plus r_a strictly inside the capture radius.
double intrinsic_reward(double distance, double capture_radius, double capture_bonus);

struct AvoidanceGeometry {
  double obstacle_distance = -1.0;  // negative when there is no obstacle
  double neighbor_distance = -1.0;  // negative when there is no neighbour
};

double avoidance_reward(const AvoidanceGeometry& geometry, double agent_radius,
                        double obstacle_radius, const RewardConstants& k);

double path_reward(double intrinsic, double avoidance, double omega2);

/// r_path of pursuer i in the current world, against its allocated evader.
double pursuer_path_reward(const ArenaConfig& config, const WorldState& world, int pursuer,
                           const RewardConstants& k);

/// Maps tanh outputs u in [-1, 1]^2 to (speed, heading).
PlanAction squash_action(double u_speed, double u_heading, double vmax);

struct ActorOutput {
  PlanAction action;
  nn::Vector normalized;  // the (noisy) tanh-space action stored for learning
};

/// Maps an angle into [-pi, pi].
double wrap_angle(double a);

/// Deterministic when noise_scale == 0; otherwise Gaussian noise is added
/// to the pre-tanh activations. The squashed heading is taken relative to
/// the bearing of the allocated evader (observation[0..1]), so u_heading = 0
/// means straight at it.
ActorOutput actor_act(const nn::Mlp& actor, const nn::Vector& observation, double noise_scale,
                      Rng& rng, double vmax);

}  // namespace swarm::plan
