#include "swarm/plan/planning.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "swarm/core/error.hpp"

namespace swarm::plan {

int nearest_neighbor(const WorldState& world, int pursuer) {
  const Vec2 me = world.pursuers[static_cast<std::size_t>(pursuer)].p;
  int best = -1;
  double best_d = 0.0;
  for (std::size_t k = 0; k < world.pursuers.size(); ++k) {
    if (static_cast<int>(k) == pursuer || world.pursuers[k].frozen) continue;
    const double d = distance(me, world.pursuers[k].p);
    if (best < 0 || d < best_d) {
      best = static_cast<int>(k);
      best_d = d;
    }
  }
  return best;
}

int nearest_obstacle(const WorldState& world, int pursuer) {
  const Vec2 me = world.pursuers[static_cast<std::size_t>(pursuer)].p;
  int best = -1;
  double best_d = 0.0;
  for (std::size_t k = 0; k < world.obstacles.size(); ++k) {
    const double d = distance(me, world.obstacles[k].p);
    if (best < 0 || d < best_d) {
      best = static_cast<int>(k);
      best_d = d;
    }
  }
  return best;
}

nn::Vector build_observation(const ArenaConfig& config, const WorldState& world, int pursuer) {
  const Pursuer& self = world.pursuers[static_cast<std::size_t>(pursuer)];
  const int target = world.allocation.rows() > pursuer ? world.allocation.target_of(pursuer) : -1;
  if (target < 0)
    throw Error(ErrorKind::Unassigned,
                "pursuer " + std::to_string(pursuer) + " has no allocated evader");
  const double scale = 1.0 / config.length;
  nn::Vector z(kObservationWidth);
  auto put = [&](int at, const Vec2& rel_p, const Vec2& rel_v) {
    z[at] = rel_p.x * scale;
    z[at + 1] = rel_p.y * scale;
    z[at + 2] = rel_v.x;
    z[at + 3] = rel_v.y;
  };
  const Evader& e = world.evaders[static_cast<std::size_t>(target)];
  put(0, e.p - self.p, e.v - self.v);

  const int n = nearest_neighbor(world, pursuer);
  if (n >= 0) {
    const Pursuer& other = world.pursuers[static_cast<std::size_t>(n)];
    put(4, other.p - self.p, other.v - self.v);
  } else {
    z.segment(4, 4) << kAbsentOffset, kAbsentOffset, 0.0, 0.0;
  }

  const int o = nearest_obstacle(world, pursuer);
  if (o >= 0) {
    const Obstacle& ob = world.obstacles[static_cast<std::size_t>(o)];
    put(8, ob.p - self.p, ob.v - self.v);
  } else {
    z.segment(8, 4) << kAbsentOffset, kAbsentOffset, 0.0, 0.0;
  }
  z[12] = self.v.x;
  z[13] = self.v.y;
  return z;
}

double intrinsic_reward(double distance, double capture_radius, double capture_bonus) {
  double r = -distance / capture_radius;
  if (distance < capture_radius) r += capture_bonus;
  return r;
}

double avoidance_reward(const AvoidanceGeometry& g, double agent_radius, double obstacle_radius,
                        const RewardConstants& k) {
  double r = 0.0;
  if (g.obstacle_distance >= 0.0) {
    const double zone = agent_radius + obstacle_radius + k.threat_distance;
    if (g.obstacle_distance < zone) r += (g.obstacle_distance - zone) / zone - k.obstacle_penalty;
  }
  if (g.neighbor_distance >= 0.0) {
    const double inner = 2.0 * agent_radius;
    const double zone = inner + k.threat_distance;
    if (g.neighbor_distance > inner && g.neighbor_distance < zone)
      r += (g.neighbor_distance - zone) / zone - k.neighbor_penalty;
  }
  return r;
}

double path_reward(double intrinsic, double avoidance, double omega2) {
  return omega2 * intrinsic + (1.0 - omega2) * avoidance;
}

double pursuer_path_reward(const ArenaConfig& config, const WorldState& world, int pursuer,
                           const RewardConstants& k) {
  const Pursuer& self = world.pursuers[static_cast<std::size_t>(pursuer)];
  const int target = world.allocation.target_of(pursuer);
  if (target < 0)
    throw Error(ErrorKind::Unassigned,
                "pursuer " + std::to_string(pursuer) + " has no allocated evader");
  const double d = distance(self.p, world.evaders[static_cast<std::size_t>(target)].p);
  const double r_int = intrinsic_reward(d, self.capture_radius, k.capture_bonus);

  AvoidanceGeometry g;
  if (const int o = nearest_obstacle(world, pursuer); o >= 0)
    g.obstacle_distance = distance(self.p, world.obstacles[static_cast<std::size_t>(o)].p);
  if (const int n = nearest_neighbor(world, pursuer); n >= 0)
    g.neighbor_distance = distance(self.p, world.pursuers[static_cast<std::size_t>(n)].p);
  const double r_avo = avoidance_reward(g, config.agent_radius, config.obstacle_radius, k);
  return path_reward(r_int, r_avo, k.omega2);
}

PlanAction squash_action(double u_speed, double u_heading, double vmax) {
  u_speed = std::clamp(u_speed, -1.0, 1.0);
  u_heading = std::clamp(u_heading, -1.0, 1.0);
  return PlanAction{0.5 * (u_speed + 1.0) * vmax, std::numbers::pi * u_heading};
}

double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * std::numbers::pi);
  return std::clamp(a, -std::numbers::pi, std::numbers::pi);
}

ActorOutput actor_act(const nn::Mlp& actor, const nn::Vector& observation, double noise_scale,
                      Rng& rng, double vmax) {
  nn::Vector u = actor.forward_one(observation);
  if (noise_scale > 0.0) {
    for (Eigen::Index k = 0; k < u.size(); ++k) {
      const double clipped = std::clamp(u[k], -1.0 + 1e-12, 1.0 - 1e-12);
      u[k] = std::tanh(std::atanh(clipped) + noise_scale * rng.normal());
    }
  }
  PlanAction a = squash_action(u[0], u[1], vmax);
  a.heading = wrap_angle(a.heading + std::atan2(observation[1], observation[0]));
  return ActorOutput{a, u};
}

}  // namespace swarm::plan
