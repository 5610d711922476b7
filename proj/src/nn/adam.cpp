#include "swarm/nn/adam.hpp"

#include <cmath>

#include "swarm/core/error.hpp"

namespace swarm::nn {

Adam::Adam(const ParamList& like, AdamConfig config) : config_(config) {
  for (const auto& p : like) {
    m_.push_back(Matrix::Zero(p.rows(), p.cols()));
    v_.push_back(Matrix::Zero(p.rows(), p.cols()));
  }
}

void Adam::step(ParamList& params, const ParamList& grads) {
  if (params.size() != m_.size() || grads.size() != m_.size())
    throw Error(ErrorKind::IncompatibleEncoding, "adam step on mismatched parameter lists");
  if (!all_finite(grads)) throw Error(ErrorKind::Divergence, "non-finite gradient in adam step");
  ++steps_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(steps_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    m_[k] = config_.beta1 * m_[k] + (1.0 - config_.beta1) * grads[k];
    v_[k] = config_.beta2 * v_[k] + (1.0 - config_.beta2) * grads[k].cwiseAbs2();
    const auto m_hat = m_[k].array() / c1;
    const auto v_hat = v_[k].array() / c2;
    params[k].array() -= config_.lr * m_hat / (v_hat.sqrt() + config_.eps);
  }
}

}  // namespace swarm::nn
