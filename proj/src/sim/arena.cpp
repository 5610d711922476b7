#include "swarm/sim/arena.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <tuple>

#include "swarm/core/error.hpp"

namespace swarm {

namespace {

constexpr double kSingularSeparation = 1e-6;
constexpr double kSingularRepulsion = 1e3;
constexpr int kPlacementRetries = 1000;
constexpr double kBandDepth = 5.0;
constexpr double kBandMarginY = 1.0;

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::Config, what);
}

}  // namespace

double ArenaConfig::diagonal() const { return std::hypot(length, width); }

void ArenaConfig::validate() const {
  require(length > 0 && width > 0, "arena length and width must be positive");
  require(dt > 0, "dt must be positive");
  require(episode_len > 0, "episode_len must be positive");
  require(n_pursuers >= 1 && n_evaders >= 1, "need at least one pursuer and one evader");
  require(n_obstacles >= 0, "n_obstacles must be non-negative");
  require(!capture_radii.empty(), "capture_radii must be non-empty");
  require(!evader_vmax.empty(), "evader_vmax must be non-empty");
  for (double r : capture_radii) require(r > 0, "capture radii must be positive");
  require(pursuer_vmax > 0, "pursuer_vmax must be positive");
  for (double v : evader_vmax)
    require(v > pursuer_vmax, "every evader_vmax must exceed pursuer_vmax");
  require(agent_radius > 0 && obstacle_radius > 0, "body radii must be positive");
  require(obstacle_speed_min >= 0 && obstacle_speed_min <= obstacle_speed_max,
          "obstacle speed range must satisfy 0 <= min <= max");
  require(obstacle_redirect_interval >= 1, "obstacle_redirect_interval must be >= 1");
  require(target_reach_radius > 0, "target_reach_radius must be positive");
  require(std::abs(target.x) <= half_length() && std::abs(target.y) <= half_width(),
          "target point must lie inside the arena");
  require(start_separation > 0 && start_separation + kBandDepth <= length,
          "start separation does not fit the arena length");
  require(width > 2 * kBandMarginY, "arena too narrow for start bands");
}

int WorldState::reached_count() const {
  return static_cast<int>(std::count_if(evaders.begin(), evaders.end(),
                                        [](const Evader& e) { return e.reached; }));
}

int WorldState::active_pursuer_count() const {
  return static_cast<int>(std::count_if(pursuers.begin(), pursuers.end(),
                                        [](const Pursuer& p) { return !p.frozen; }));
}

int WorldState::active_evader_count() const {
  return static_cast<int>(std::count_if(evaders.begin(), evaders.end(),
                                        [](const Evader& e) { return e.active(); }));
}

const char* to_string(Winner w) {
  switch (w) {
    case Winner::None: return "none";
    case Winner::Pursuers: return "pursuers";
    case Winner::Evaders: return "evaders";
  }
  return "none";
}

const char* to_string(EndReason r) {
  switch (r) {
    case EndReason::None: return "none";
    case EndReason::HalfCaptured: return "half-captured";
    case EndReason::Timeout: return "timeout";
    case EndReason::HalfReached: return "half-reached";
  }
  return "none";
}

EpisodeOutcome classify_outcome(int n_evaders, int captured, int reached, int t,
                                int episode_len) {
  EpisodeOutcome out;
  out.captured_count = captured;
  out.reached_count = reached;
  // "more than half" is strict: 2 * count > n
  if (2 * captured > n_evaders) {
    out.winner = Winner::Pursuers;
    out.reason = EndReason::HalfCaptured;
  } else if (2 * reached > n_evaders) {
    out.winner = Winner::Evaders;
    out.reason = EndReason::HalfReached;
  } else if (t >= episode_len) {
    out.winner = Winner::Pursuers;
    out.reason = EndReason::Timeout;
  }
  return out;
}

Arena::Arena(ArenaConfig config) : config_(std::move(config)) { config_.validate(); }

Vec2 Arena::clamp_to_arena(Vec2 p) const {
  p.x = std::clamp(p.x, -config_.half_length(), config_.half_length());
  p.y = std::clamp(p.y, -config_.half_width(), config_.half_width());
  return p;
}

WorldState Arena::generate_instance(std::uint64_t seed) const {
  const ArenaConfig& c = config_;
  Rng rng(derive_seed(seed, 0));

  WorldState w;
  w.rng = Rng(derive_seed(seed, 1));
  w.allocation = AllocationMatrix(c.n_pursuers, c.n_evaders);

  const double hl = c.half_length();
  const double y_span = c.half_width() - kBandMarginY;
  const double evader_x0 = -hl;
  const double pursuer_x0 = -hl + c.start_separation;
  const double mid_x0 = evader_x0 + kBandDepth + 2.0;
  const double mid_x1 = pursuer_x0 - 2.0;

  std::vector<Vec2> agents;
  auto place = [&](double x0, double x1, auto&& ok) {
    for (int attempt = 0; attempt < kPlacementRetries; ++attempt) {
      Vec2 p{rng.uniform(x0, x1), rng.uniform(-y_span, y_span)};
      if (ok(p)) return p;
    }
    std::ostringstream os;
    os << "could not place entity in x-band [" << x0 << ", " << x1 << "] after "
       << kPlacementRetries << " attempts";
    throw Error(ErrorKind::InfeasibleInstance, os.str());
  };
  auto clear_of_agents = [&](const Vec2& p, double gap) {
    return std::all_of(agents.begin(), agents.end(),
                       [&](const Vec2& q) { return distance(p, q) >= gap; });
  };

  const double agent_gap = 2.0 * c.agent_radius;
  for (int i = 0; i < c.n_pursuers; ++i) {
    Pursuer p;
    p.p = place(pursuer_x0, pursuer_x0 + kBandDepth,
                [&](const Vec2& q) { return clear_of_agents(q, agent_gap); });
    p.ability = i % static_cast<int>(c.capture_radii.size());
    p.capture_radius = c.capture_radii[static_cast<std::size_t>(p.ability)];
    p.vmax = c.pursuer_vmax;
    agents.push_back(p.p);
    w.pursuers.push_back(p);
  }
  for (int j = 0; j < c.n_evaders; ++j) {
    Evader e;
    e.p = place(evader_x0, evader_x0 + kBandDepth,
                [&](const Vec2& q) { return clear_of_agents(q, agent_gap); });
    e.ability = j % static_cast<int>(c.evader_vmax.size());
    e.vmax = c.evader_vmax[static_cast<std::size_t>(e.ability)];
    agents.push_back(e.p);
    w.evaders.push_back(e);
  }
  const double obstacle_agent_gap = c.agent_radius + c.obstacle_radius;
  const double obstacle_gap = 2.0 * c.obstacle_radius;
  for (int k = 0; k < c.n_obstacles; ++k) {
    Obstacle o;
    o.p = place(mid_x0, mid_x1, [&](const Vec2& q) {
      if (!clear_of_agents(q, obstacle_agent_gap)) return false;
      return std::all_of(w.obstacles.begin(), w.obstacles.end(), [&](const Obstacle& other) {
        return distance(q, other.p) >= obstacle_gap;
      });
    });
    const double speed = rng.uniform(c.obstacle_speed_min, c.obstacle_speed_max);
    const double heading = rng.uniform(-std::numbers::pi, std::numbers::pi);
    o.v = Vec2{speed * std::cos(heading), speed * std::sin(heading)};
    o.steps_until_redirect = c.obstacle_redirect_interval;
    w.obstacles.push_back(o);
  }
  return w;
}

Vec2 Arena::apply_pursuer_action(const WorldState& state, int i, PursuerAction action,
                                 bool* clamped) const {
  const Pursuer& p = state.pursuers[static_cast<std::size_t>(i)];
  if (p.frozen) return p.p;
  bool fixed = false;
  if (!std::isfinite(action.speed)) {
    action.speed = 0.0;
    fixed = true;
  }
  if (!std::isfinite(action.heading)) {
    action.heading = 0.0;
    fixed = true;
  }
  if (action.speed < 0.0 || action.speed > p.vmax) {
    action.speed = std::clamp(action.speed, 0.0, p.vmax);
    fixed = true;
  }
  if (std::abs(action.heading) > std::numbers::pi) {
    action.heading = std::clamp(action.heading, -std::numbers::pi, std::numbers::pi);
    fixed = true;
  }
  if (clamped) *clamped = fixed;
  const Vec2 step{config_.dt * action.speed * std::cos(action.heading),
                  config_.dt * action.speed * std::sin(action.heading)};
  return clamp_to_arena(p.p + step);
}

Vec2 Arena::apf_evader_velocity(const WorldState& state, int j) const {
  const Evader& e = state.evaders[static_cast<std::size_t>(j)];
  if (!e.active()) return Vec2{};

  Vec2 to_target = config_.target - e.p;
  const double target_dist = to_target.norm();
  Vec2 attract = target_dist > 0.0 ? to_target * (1.0 / target_dist) : Vec2{};
  Vec2 v = attract;

  auto repel = [&](const Vec2& source) {
    const Vec2 d = e.p - source;
    const double sep = d.norm();
    if (sep < kSingularSeparation) {
      // direction is meaningless at coincidence; push back along the approach line
      Vec2 dir = sep > 0.0 ? d * (1.0 / sep) : attract * -1.0;
      if (dir.norm_sq() == 0.0) dir = Vec2{-1.0, 0.0};
      v += dir * kSingularRepulsion;
    } else {
      v += d * (1.0 / (sep * sep));
    }
  };

  for (const Pursuer& p : state.pursuers) repel(p.p);
  for (std::size_t k = 0; k < state.evaders.size(); ++k) {
    if (static_cast<int>(k) == j || state.evaders[k].reached) continue;
    repel(state.evaders[k].p);
  }
  for (const Obstacle& o : state.obstacles) repel(o.p);

  const double speed = v.norm();
  if (speed > e.vmax) v *= e.vmax / speed;
  return v;
}

StepEvents Arena::step(WorldState& w, std::span<const PursuerAction> actions) const {
  const ArenaConfig& c = config_;
  StepEvents ev;

  std::vector<Vec2> evader_vel(w.evaders.size());
  for (std::size_t j = 0; j < w.evaders.size(); ++j)
    evader_vel[j] = apf_evader_velocity(w, static_cast<int>(j));

  std::vector<Vec2> pursuer_next(w.pursuers.size());
  for (std::size_t i = 0; i < w.pursuers.size(); ++i) {
    const PursuerAction a = i < actions.size() ? actions[i] : PursuerAction{};
    bool clamped = false;
    pursuer_next[i] = apply_pursuer_action(w, static_cast<int>(i), a, &clamped);
    if (clamped && !w.pursuers[i].frozen) ++ev.clamped_actions;
  }
  for (std::size_t i = 0; i < w.pursuers.size(); ++i) {
    Pursuer& p = w.pursuers[i];
    if (p.frozen) {
      p.v = Vec2{};
      continue;
    }
    p.v = (pursuer_next[i] - p.p) * (1.0 / c.dt);
    p.p = pursuer_next[i];
  }
  for (std::size_t j = 0; j < w.evaders.size(); ++j) {
    Evader& e = w.evaders[j];
    if (!e.active()) {
      e.v = Vec2{};
      continue;
    }
    const Vec2 next = clamp_to_arena(e.p + evader_vel[j] * c.dt);
    e.v = (next - e.p) * (1.0 / c.dt);
    e.p = next;
  }

  for (Obstacle& o : w.obstacles) {
    o.p += o.v * c.dt;
    // reflect the heading at the walls
    if (o.p.x > c.half_length()) o.v.x = -std::abs(o.v.x);
    if (o.p.x < -c.half_length()) o.v.x = std::abs(o.v.x);
    if (o.p.y > c.half_width()) o.v.y = -std::abs(o.v.y);
    if (o.p.y < -c.half_width()) o.v.y = std::abs(o.v.y);
    o.p = clamp_to_arena(o.p);
    if (--o.steps_until_redirect <= 0) {
      const double speed = w.rng.uniform(c.obstacle_speed_min, c.obstacle_speed_max);
      const double heading = w.rng.uniform(-std::numbers::pi, std::numbers::pi);
      o.v = Vec2{speed * std::cos(heading), speed * std::sin(heading)};
      o.steps_until_redirect = c.obstacle_redirect_interval;
    }
  }

  // Captures: closest pair first, then lowest evader, then lowest pursuer.
  std::vector<std::tuple<double, int, int>> candidates;
  for (std::size_t i = 0; i < w.pursuers.size(); ++i) {
    const Pursuer& p = w.pursuers[i];
    if (p.frozen) continue;
    for (std::size_t j = 0; j < w.evaders.size(); ++j) {
      const Evader& e = w.evaders[j];
      if (!e.active()) continue;
      const double d = distance(p.p, e.p);
      if (d < p.capture_radius)
        candidates.emplace_back(d, static_cast<int>(j), static_cast<int>(i));
    }
  }
  std::sort(candidates.begin(), candidates.end());
  for (const auto& [d, j, i] : candidates) {
    Pursuer& p = w.pursuers[static_cast<std::size_t>(i)];
    Evader& e = w.evaders[static_cast<std::size_t>(j)];
    if (p.frozen || e.frozen) continue;
    p.frozen = true;
    e.frozen = true;
    p.v = Vec2{};
    e.v = Vec2{};
    w.captures.push_back({i, j});
    ev.new_captures.push_back({i, j});
  }

  for (std::size_t j = 0; j < w.evaders.size(); ++j) {
    Evader& e = w.evaders[j];
    if (e.active() && distance(e.p, c.target) < c.target_reach_radius) {
      e.reached = true;
      e.v = Vec2{};
      ev.new_reached.push_back(static_cast<int>(j));
    }
  }

  // Contacts are counted only; they never alter motion.
  std::vector<Vec2> bodies;
  for (const Pursuer& p : w.pursuers) bodies.push_back(p.p);
  for (const Evader& e : w.evaders)
    if (!e.reached) bodies.push_back(e.p);
  for (std::size_t a = 0; a < bodies.size(); ++a) {
    for (std::size_t b = a + 1; b < bodies.size(); ++b)
      if (distance(bodies[a], bodies[b]) < 2.0 * c.agent_radius) ++ev.agent_collisions;
    for (const Obstacle& o : w.obstacles)
      if (distance(bodies[a], o.p) < c.agent_radius + c.obstacle_radius)
        ++ev.obstacle_collisions;
  }

  ++w.t;
  return ev;
}

EpisodeOutcome Arena::check_termination(const WorldState& w) const {
  return classify_outcome(static_cast<int>(w.evaders.size()), w.captured_count(), w.reached_count(), w.t,
                          config_.episode_len);
}

}  // namespace swarm
