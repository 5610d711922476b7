#include "swarm/interaction/interaction.hpp"

#include <algorithm>
#include <cmath>

#include "swarm/core/error.hpp"

namespace swarm::interaction {

namespace {

// Clamp in floating point first so that huge V̂ cannot overflow the cast.
int floor_clamped(double x, int lo, int hi) {
  if (std::isnan(x)) return lo;
  const double f = std::floor(x);
  return static_cast<int>(std::clamp(f, static_cast<double>(lo), static_cast<double>(hi)));
}

}  // namespace

void InteractionParams::validate() const {
  if (!(h_min >= 1 && h_min <= h_base && h_base <= h_max))
    throw Error(ErrorKind::Config, "interaction: need 1 <= H_min <= H_base <= H_max");
  if (!(n_base >= 1 && n_base <= n_max))
    throw Error(ErrorKind::Config, "interaction: need 1 <= N_base <= N_max");
  if (!(w_min > 0.0 && w_min <= 1.0))
    throw Error(ErrorKind::Config, "interaction: w_min must lie in (0, 1]");
  if (omega3 < 0.0 || omega4 < 0.0 || omega5 < 0.0)
    throw Error(ErrorKind::Config, "interaction: weighting factors must be non-negative");
}

int adaptive_H(double v, const InteractionParams& p) {
  return floor_clamped(-p.omega3 * v + p.h_base, p.h_min, p.h_max);
}

int adaptive_N(double v, const InteractionParams& p) {
  return floor_clamped(-p.omega4 * v + p.n_base, 1, p.n_max);
}

double sample_weight(double v, const InteractionParams& p) {
  const double w = -p.omega5 * v + p.w_base;
  if (std::isnan(w)) return p.w_min;
  return std::clamp(w, p.w_min, 1.0);
}

double total_reward(int h, double r_allo, double path_sum, int captures) {
  return h * r_allo + path_sum + captures;
}

}  // namespace swarm::interaction
