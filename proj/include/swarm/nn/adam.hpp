#pragma once

#include "swarm/nn/mlp.hpp"

namespace swarm::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected Adam over a ParamList.
class Adam {
 public:
  Adam() = default;
  Adam(const ParamList& like, AdamConfig config);

  /// Throws Error(Divergence) on non-finite gradients; params are left untouched.
  void step(ParamList& params, const ParamList& grads);

  const AdamConfig& config() const { return config_; }
  long steps() const { return steps_; }

  ParamList& first_moment() { return m_; }
  ParamList& second_moment() { return v_; }
  const ParamList& first_moment() const { return m_; }
  const ParamList& second_moment() const { return v_; }
  void set_steps(long steps) { steps_ = steps; }

 private:
  AdamConfig config_;
  ParamList m_;
  ParamList v_;
  long steps_ = 0;
};

}  // namespace swarm::nn
