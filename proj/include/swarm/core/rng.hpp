#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>

namespace swarm {

/// Mixes a base seed with a stream id so that independent consumers
/// (instance generation, replay sampling, exploration) never share draws.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

/// Seeded generator with platform-independent distributions. The standard
/// library leaves distribution algorithms implementation-defined, so the
/// transforms here are written out explicitly.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller.
  double normal();
  /// Unbiased integer in [0, n).
  std::size_t index(std::size_t n);

  /// Full generator state, for checkpoints.
  std::string serialize() const;
  void deserialize(const std::string& state);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace swarm
