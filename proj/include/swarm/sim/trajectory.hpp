#pragma once

#include <fstream>
#include <string>

#include "json.hpp"
#include "swarm/sim/arena.hpp"

namespace swarm {

/// One JSONL record: {t, pursuers, evaders, obstacles, captures, allocation}.
nlohmann::json trajectory_record(const WorldState& state);

/// Appends one record per call; the file is truncated on open.
class TrajectoryWriter {
 public:
  explicit TrajectoryWriter(const std::string& path);

  void write(const WorldState& state);
  int records() const { return records_; }

 private:
  std::ofstream out_;
  int records_ = 0;
};

}  // namespace swarm
