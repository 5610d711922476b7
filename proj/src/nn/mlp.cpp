#include "swarm/nn/mlp.hpp"

#include <cmath>
#include <sstream>

#include "swarm/core/error.hpp"

namespace swarm::nn {

namespace {

void check_widths(const std::vector<int>& widths, OutputHead head) {
  if (widths.size() < 2) throw Error(ErrorKind::Config, "mlp needs at least input and output widths");
  for (int w : widths)
    if (w <= 0) throw Error(ErrorKind::Config, "mlp widths must be positive");
  if (head == OutputHead::Gaussian && widths.back() % 2 != 0)
    throw Error(ErrorKind::Config, "gaussian head needs an even output width");
}

}  // namespace

Mlp::Mlp(std::vector<int> widths, OutputHead head, Rng& rng)
    : widths_(std::move(widths)), head_(head) {
  check_widths(widths_, head_);
  for (int l = 0; l < layers(); ++l) {
    const int fan_in = widths_[static_cast<std::size_t>(l)];
    const int fan_out = widths_[static_cast<std::size_t>(l) + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Matrix w(fan_out, fan_in);
    Matrix b(fan_out, 1);
    for (Eigen::Index c = 0; c < w.cols(); ++c)
      for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = rng.uniform(-bound, bound);
    for (Eigen::Index r = 0; r < b.rows(); ++r) b(r, 0) = rng.uniform(-bound, bound);
    params_.push_back(std::move(w));
    params_.push_back(std::move(b));
  }
}

Mlp::Mlp(std::vector<int> widths, OutputHead head, ParamList params)
    : widths_(std::move(widths)), head_(head), params_(std::move(params)) {
  check_widths(widths_, head_);
  if (params_.size() != 2 * static_cast<std::size_t>(layers()))
    throw Error(ErrorKind::IncompatibleEncoding, "parameter count does not match layer widths");
  for (int l = 0; l < layers(); ++l) {
    const auto& w = params_[2 * static_cast<std::size_t>(l)];
    const auto& b = params_[2 * static_cast<std::size_t>(l) + 1];
    if (w.cols() != widths_[static_cast<std::size_t>(l)] ||
        w.rows() != widths_[static_cast<std::size_t>(l) + 1] || b.rows() != w.rows() ||
        b.cols() != 1)
      throw Error(ErrorKind::IncompatibleEncoding, "parameter shape does not match layer widths");
  }
}

void Mlp::check_input(const Matrix& x) const {
  if (x.rows() != input_width()) {
    std::ostringstream os;
    os << "input width " << x.rows() << " does not match network input " << input_width();
    throw Error(ErrorKind::IncompatibleEncoding, os.str());
  }
}

Matrix Mlp::forward(const Matrix& x) const {
  Tape tape;
  return forward(x, tape);
}

Matrix Mlp::forward(const Matrix& x, Tape& tape) const {
  check_input(x);
  tape.inputs.clear();
  tape.pre.clear();
  Matrix a = x;
  for (int l = 0; l < layers(); ++l) {
    const auto& w = params_[2 * static_cast<std::size_t>(l)];
    const auto& b = params_[2 * static_cast<std::size_t>(l) + 1];
    Matrix z = w * a;
    z.colwise() += b.col(0);
    tape.inputs.push_back(std::move(a));
    const bool last = (l + 1 == layers());
    if (!last) {
      a = z.cwiseMax(0.0);
    } else {
      switch (head_) {
        case OutputHead::Linear:
          a = z;
          break;
        case OutputHead::Tanh:
          a = z.array().tanh().matrix();
          break;
        case OutputHead::Gaussian: {
          a = z;
          const Eigen::Index k = z.rows() / 2;
          a.bottomRows(k) = z.bottomRows(k).cwiseMax(kMinLogVar).cwiseMin(kMaxLogVar);
          break;
        }
      }
    }
    tape.pre.push_back(std::move(z));
  }
  tape.output = a;
  return a;
}

ParamList Mlp::backward(const Tape& tape, const Matrix& d_out, Matrix* d_input,
                          const Matrix* d_logits) const {
  if (tape.pre.size() != static_cast<std::size_t>(layers()))
    throw Error(ErrorKind::Config, "backward called without a matching forward tape");
  ParamList grads(params_.size());
  Matrix delta;
  {
    const Matrix& z = tape.pre.back();
    switch (head_) {
      case OutputHead::Linear:
        delta = d_out;
        break;
      case OutputHead::Tanh:
        delta = d_out.cwiseProduct((1.0 - tape.output.array().square()).matrix());
        break;
      case OutputHead::Gaussian: {
        delta = d_out;
        const Eigen::Index k = z.rows() / 2;
        for (Eigen::Index c = 0; c < z.cols(); ++c)
          for (Eigen::Index r = k; r < z.rows(); ++r)
            if (z(r, c) < kMinLogVar || z(r, c) > kMaxLogVar) delta(r, c) = 0.0;
        break;
      }
    }
  }
  if (d_logits) delta += *d_logits;
  for (int l = layers() - 1; l >= 0; --l) {
    const std::size_t idx = static_cast<std::size_t>(l);
    grads[2 * idx] = delta * tape.inputs[idx].transpose();
    grads[2 * idx + 1] = delta.rowwise().sum();
    if (l > 0 || d_input) {
      Matrix back = params_[2 * idx].transpose() * delta;
      if (l > 0) {
        const Matrix& z_prev = tape.pre[idx - 1];
        delta = back.cwiseProduct((z_prev.array() > 0.0).cast<double>().matrix());
      } else {
        *d_input = std::move(back);
      }
    }
  }
  return grads;
}

ParamList Mlp::zeros_like() const {
  ParamList z;
  z.reserve(params_.size());
  for (const auto& p : params_) z.push_back(Matrix::Zero(p.rows(), p.cols()));
  return z;
}

void soft_update(ParamList& target, const ParamList& online, double zeta) {
  if (target.size() != online.size())
    throw Error(ErrorKind::IncompatibleEncoding, "soft_update on mismatched parameter lists");
  for (std::size_t k = 0; k < target.size(); ++k)
    target[k] = (1.0 - zeta) * target[k] + zeta * online[k];
}

bool all_finite(const ParamList& params) {
  for (const auto& p : params)
    if (!p.allFinite()) return false;
  return true;
}

}  // namespace swarm::nn
