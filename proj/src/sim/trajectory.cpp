#include "swarm/sim/trajectory.hpp"

#include "swarm/core/error.hpp"

namespace swarm {

nlohmann::json trajectory_record(const WorldState& w) {
  using nlohmann::json;
  json pursuers = json::array();
  for (std::size_t i = 0; i < w.pursuers.size(); ++i) {
    const Pursuer& p = w.pursuers[i];
    pursuers.push_back({{"id", i}, {"x", p.p.x}, {"y", p.p.y}, {"vx", p.v.x},
                        {"vy", p.v.y}, {"frozen", p.frozen}});
  }
  json evaders = json::array();
  for (std::size_t j = 0; j < w.evaders.size(); ++j) {
    const Evader& e = w.evaders[j];
    evaders.push_back({{"id", j}, {"x", e.p.x}, {"y", e.p.y}, {"vx", e.v.x},
                       {"vy", e.v.y}, {"frozen", e.frozen}, {"reached", e.reached}});
  }
  json obstacles = json::array();
  for (std::size_t k = 0; k < w.obstacles.size(); ++k) {
    const Obstacle& o = w.obstacles[k];
    obstacles.push_back(
        {{"id", k}, {"x", o.p.x}, {"y", o.p.y}, {"vx", o.v.x}, {"vy", o.v.y}});
  }
  json captures = json::array();
  for (const CapturePair& c : w.captures) captures.push_back({c.pursuer, c.evader});
  return {{"t", w.t},
          {"pursuers", std::move(pursuers)},
          {"evaders", std::move(evaders)},
          {"obstacles", std::move(obstacles)},
          {"captures", std::move(captures)},
          {"allocation", w.allocation.targets()}};
}

TrajectoryWriter::TrajectoryWriter(const std::string& path) : out_(path, std::ios::trunc) {
  if (!out_) throw Error(ErrorKind::Io, "cannot open trajectory file " + path);
}

void TrajectoryWriter::write(const WorldState& state) {
  out_ << trajectory_record(state).dump() << '\n';
  ++records_;
}

}  // namespace swarm
