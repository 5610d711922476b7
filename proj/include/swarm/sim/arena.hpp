#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "swarm/alloc/allocation_matrix.hpp"
#include "swarm/core/rng.hpp"
#include "swarm/core/vec2.hpp"

namespace swarm {

/// Static arena and swarm parameters. Abilities are indexed by class: the
/// k-th agent of each side uses class k mod (number of classes).
struct ArenaConfig {
  double length = 40.0;            // D1, along x
  double width = 20.0;             // D2, along y
  double start_separation = 30.0;  // D3, distance between start band centers
  int n_pursuers = 10;
  int n_evaders = 10;
  int n_obstacles = 4;
  double dt = 0.2;
  int episode_len = 300;
  std::vector<double> capture_radii{0.6, 0.7, 0.8, 0.9, 1.0};
  double pursuer_vmax = 0.5;
  std::vector<double> evader_vmax{0.6, 0.7, 0.8, 0.9, 1.0};
  double agent_radius = 0.2;
  double obstacle_radius = 0.5;
  double obstacle_speed_min = 0.2;
  double obstacle_speed_max = 0.5;
  int obstacle_redirect_interval = 20;
  Vec2 target{18.0, 0.0};
  double target_reach_radius = 1.0;
  std::uint64_t seed = 0;

  double half_length() const { return 0.5 * length; }
  double half_width() const { return 0.5 * width; }
  double diagonal() const;

  /// Throws Error(Config) describing the first violated invariant.
  void validate() const;
};

struct Pursuer {
  Vec2 p;
  Vec2 v;
  bool frozen = false;
  int ability = 0;
  double capture_radius = 0.0;
  double vmax = 0.0;
};

struct Evader {
  Vec2 p;
  Vec2 v;
  bool frozen = false;
  bool reached = false;
  int ability = 0;
  double vmax = 0.0;

  /// Still in play: neither captured nor at the target.
  bool active() const { return !frozen && !reached; }
};

struct Obstacle {
  Vec2 p;
  Vec2 v;
  int steps_until_redirect = 0;
};

struct CapturePair {
  int pursuer = -1;
  int evader = -1;
  friend bool operator==(const CapturePair&, const CapturePair&) = default;
};

struct WorldState {
  int t = 0;
  std::vector<Pursuer> pursuers;
  std::vector<Evader> evaders;
  std::vector<Obstacle> obstacles;
  AllocationMatrix allocation;
  std::vector<CapturePair> captures;
  /// Stream for obstacle redirects; part of the state so replays are exact.
  Rng rng;

  int captured_count() const { return static_cast<int>(captures.size()); }
  int reached_count() const;
  int active_pursuer_count() const;
  int active_evader_count() const;
};

struct PursuerAction {
  double speed = 0.0;
  double heading = 0.0;
};

struct StepEvents {
  std::vector<CapturePair> new_captures;
  std::vector<int> new_reached;
  int agent_collisions = 0;
  int obstacle_collisions = 0;
  int clamped_actions = 0;
};

enum class Winner { None, Pursuers, Evaders };
enum class EndReason { None, HalfCaptured, Timeout, HalfReached };

struct EpisodeOutcome {
  Winner winner = Winner::None;
  EndReason reason = EndReason::None;
  int captured_count = 0;
  int reached_count = 0;

  bool done() const { return winner != Winner::None; }
};

const char* to_string(Winner w);
const char* to_string(EndReason r);

/// Outcome from raw counts. Captures are resolved before this is asked, so
/// a capture on the final step counts toward the pursuers' majority.
EpisodeOutcome classify_outcome(int n_evaders, int captured, int reached, int t,
                                int episode_len);

/// Pursuit-evasion rules engine over one ArenaConfig.
class Arena {
 public:
  explicit Arena(ArenaConfig config);

  const ArenaConfig& config() const { return config_; }

  /// Deterministic in (config, seed). Throws Error(InfeasibleInstance)
  /// when non-overlapping placement fails.
  WorldState generate_instance(std::uint64_t seed) const;

  /// First-order integration of one pursuer, clamped to the arena. Out of
  /// range speeds/headings are clamped and reported through `clamped`.
  Vec2 apply_pursuer_action(const WorldState& state, int i, PursuerAction action,
                            bool* clamped = nullptr) const;

  /// Attraction to the target plus inverse-distance repulsion from every
  /// other entity, capped at the evader's top speed.
  Vec2 apf_evader_velocity(const WorldState& state, int j) const;

  /// Advances the world by one step. `actions` has one entry per pursuer;
  /// entries for frozen pursuers are ignored.
  StepEvents step(WorldState& state, std::span<const PursuerAction> actions) const;

  EpisodeOutcome check_termination(const WorldState& state) const;

  Vec2 clamp_to_arena(Vec2 p) const;

 private:
  ArenaConfig config_;
};

}  // namespace swarm
