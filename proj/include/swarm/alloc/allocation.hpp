#pragma once

#include <functional>
#include <span>
#include <vector>

#include "swarm/alloc/allocation_matrix.hpp"
#include "swarm/nn/mlp.hpp"
#include "swarm/sim/arena.hpp"

namespace swarm::alloc {

/// q = rho / (rho + |p_i - p_j|)
double capture_prob(double capture_radius, const Vec2& pursuer, const Vec2& evader);

/// 1 - prod(1 - q); zero for an empty set.
double joint_capture_prob(std::span<const double> probs);

/// Joint capture probability of evader j under `alloc`.
double joint_capture_prob(const WorldState& world, const AllocationMatrix& alloc, int j);

/// Sum over active evaders of joint capture probability times evader top speed.
double effectiveness(const WorldState& world, const AllocationMatrix& alloc);

struct AllocRewardParts {
  double local = 0.0;   // E(new) - E(prev)
  double global = 0.0;  // E(final) / decisions, once the round is complete
  double total = 0.0;   // omega1 * local + (1 - omega1) * global
};

AllocRewardParts alloc_rewards(double e_prev, double e_new, double e_final, int decisions,
                               bool round_complete, double omega1);

AllocRewardParts alloc_rewards(const WorldState& world, const AllocationMatrix& prev,
                               const AllocationMatrix& next, const AllocationMatrix& final_alloc,
                               int decisions, double omega1);

/// Per-candidate features: relative position (2, /D1), relative velocity (2),
/// pursuer capture radius, pursuer vmax, evader vmax, current joint capture
/// probability of the evader, pursuers already assigned to it.
inline constexpr int kCandidateWidth = 9;

namespace feature {
inline constexpr int kRelX = 0;
inline constexpr int kRelY = 1;
inline constexpr int kRelVx = 2;
inline constexpr int kRelVy = 3;
inline constexpr int kCaptureRadius = 4;
inline constexpr int kPursuerVmax = 5;
inline constexpr int kEvaderVmax = 6;
inline constexpr int kJointProb = 7;
inline constexpr int kAssigned = 8;
}  // namespace feature

nn::Vector encode_candidate(const ArenaConfig& config, const WorldState& world,
                            const AllocationMatrix& alloc, int pursuer, int evader);

/// Active evaders (uncaptured, not at the target) with their encodings as
/// columns, in ascending evader order.
struct CandidateSet {
  std::vector<int> evaders;
  nn::Matrix features;

  bool empty() const { return evaders.empty(); }
  int size() const { return static_cast<int>(evaders.size()); }
};

std::vector<int> active_evaders(const WorldState& world);

CandidateSet build_candidates(const ArenaConfig& config, const WorldState& world,
                              const AllocationMatrix& alloc, int pursuer);

struct AllocationDecision {
  int pursuer = -1;
  int evader = -1;
  int choice = -1;  // column in `candidates`
  CandidateSet candidates;
  double e_prev = 0.0;
  double e_new = 0.0;
  AllocRewardParts reward;

  nn::Vector chosen() const { return candidates.features.col(choice); }
};

struct AllocationRound {
  std::vector<AllocationDecision> decisions;
  AllocationMatrix allocation;
  double e_final = 0.0;
};

/// Chooses a column of the candidate set for the given pursuer.
using CandidateChooser = std::function<int(const CandidateSet&, int pursuer)>;

/// Sequential allocation from an empty matrix: unfrozen pursuers in
/// ascending index each pick one active evader. Rewards of every decision
/// carry the completed round's global term.
AllocationRound run_allocation_round(const ArenaConfig& config, const WorldState& world,
                                     double omega1, const CandidateChooser& choose);

/// Column with the largest single-pursuer capture probability (lowest index
/// on ties), read back from the encodings. `length` is D1.
int greedy_capture_choice(const CandidateSet& candidates, double length);

}  // namespace swarm::alloc
