#pragma once

namespace swarm::interaction {

struct InteractionParams {
  double omega3 = 10.0;
  double omega4 = 10.0;
  double omega5 = 2.0;
  int h_base = 19;
  int h_min = 10;
  int h_max = 20;
  int n_base = 3;
  int n_max = 5;
  double w_base = 1.0;
  double w_min = 0.2;

  /// Throws Error(Config) on an inconsistent parameter set.
  void validate() const;
};

/// floor(-omega3 * v + H_base), clamped to [H_min, H_max].
int adaptive_H(double v, const InteractionParams& p);
/// floor(-omega4 * v + N_base), clamped to [1, N_max].
int adaptive_N(double v, const InteractionParams& p);
/// -omega5 * v + w_base, clamped to [w_min, 1].
double sample_weight(double v, const InteractionParams& p);

/// H * r_allo + (team sum of path rewards over the H steps) + captures.
double total_reward(int h, double r_allo, double path_sum, int captures);

}  // namespace swarm::interaction
