#pragma once

#include <algorithm>
#include <cmath>

#include "swarm/nn/mlp.hpp"

namespace swarm::testing {

struct GradCheck {
  double max_rel_error = 0.0;
  double max_input_rel_error = 0.0;
};

inline double rel_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

/// Compares backward() with central differences of L = sum(d_out .* f(x))
/// over every parameter and every input entry.
inline GradCheck check_gradients(nn::Mlp net, const nn::Matrix& x, const nn::Matrix& d_out,
                                 double h = 1e-5) {
  GradCheck out;
  nn::Tape tape;
  net.forward(x, tape);
  nn::Matrix d_x;
  const nn::ParamList grads = net.backward(tape, d_out, &d_x);
  auto loss = [&](const nn::Mlp& n, const nn::Matrix& in) {
    return (n.forward(in).array() * d_out.array()).sum();
  };
  for (std::size_t k = 0; k < net.params().size(); ++k) {
    nn::Matrix& p = net.params()[k];
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      const double keep = p.data()[i];
      p.data()[i] = keep + h;
      const double up = loss(net, x);
      p.data()[i] = keep - h;
      const double down = loss(net, x);
      p.data()[i] = keep;
      const double fd = (up - down) / (2 * h);
      out.max_rel_error = std::max(out.max_rel_error, rel_error(grads[k].data()[i], fd));
    }
  }
  nn::Matrix xx = x;
  for (Eigen::Index i = 0; i < xx.size(); ++i) {
    const double keep = xx.data()[i];
    xx.data()[i] = keep + h;
    const double up = loss(net, xx);
    xx.data()[i] = keep - h;
    const double down = loss(net, xx);
    xx.data()[i] = keep;
    out.max_input_rel_error =
        std::max(out.max_input_rel_error, rel_error(d_x.data()[i], (up - down) / (2 * h)));
  }
  return out;
}

}  // namespace swarm::testing
