#pragma once

#include "swarm/sim/arena.hpp"

namespace swarm::testing {

inline ArenaConfig small_config(int n_pursuers, int n_evaders, int n_obstacles) {
  ArenaConfig c;
  c.n_pursuers = n_pursuers;
  c.n_evaders = n_evaders;
  c.n_obstacles = n_obstacles;
  return c;
}

/// Hand-placed world: agents get the abilities generate_instance would give them.
inline WorldState place(const ArenaConfig& c, std::vector<Vec2> pursuers, std::vector<Vec2> evaders,
                        std::vector<Vec2> obstacles = {}) {
  WorldState w;
  for (std::size_t i = 0; i < pursuers.size(); ++i) {
    Pursuer p;
    p.p = pursuers[i];
    p.ability = static_cast<int>(i % c.capture_radii.size());
    p.capture_radius = c.capture_radii[static_cast<std::size_t>(p.ability)];
    p.vmax = c.pursuer_vmax;
    w.pursuers.push_back(p);
  }
  for (std::size_t j = 0; j < evaders.size(); ++j) {
    Evader e;
    e.p = evaders[j];
    e.ability = static_cast<int>(j % c.evader_vmax.size());
    e.vmax = c.evader_vmax[static_cast<std::size_t>(e.ability)];
    w.evaders.push_back(e);
  }
  for (const Vec2& o : obstacles) {
    Obstacle ob;
    ob.p = o;
    ob.steps_until_redirect = c.obstacle_redirect_interval;
    w.obstacles.push_back(ob);
  }
  w.allocation = AllocationMatrix(static_cast<int>(pursuers.size()), static_cast<int>(evaders.size()));
  return w;
}

}  // namespace swarm::testing
