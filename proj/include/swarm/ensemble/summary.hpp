#pragma once

#include "swarm/nn/mlp.hpp"
#include "swarm/sim/arena.hpp"

namespace swarm {

/// Pooled description of (state, allocation) whose width does not depend on
/// the number of agents. Distances are divided by the arena diagonal.
inline constexpr int kSummaryWidth = 10;

namespace summary {
inline constexpr int kMeanPursuitDist = 0;
inline constexpr int kMinPursuitDist = 1;
inline constexpr int kMeanObstacleDist = 2;
inline constexpr int kMinObstacleDist = 3;
inline constexpr int kActivePursuers = 4;
inline constexpr int kActiveEvaders = 5;
inline constexpr int kMeanEvaderSpeed = 6;
inline constexpr int kMeanJointProb = 7;
inline constexpr int kEffectiveness = 8;  // E / n_evaders
inline constexpr int kPhase = 9;          // t / episode_len
}  // namespace summary

/// Pursuit distance is to the allocated evader when it is still active,
/// otherwise to the nearest active evader. Pursuers without an obstacle in
/// the arena contribute a distance of 1.
nn::Vector global_summary(const ArenaConfig& config, const WorldState& world);

}  // namespace swarm
