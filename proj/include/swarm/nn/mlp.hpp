#pragma once

#include <Eigen/Dense>
#include <vector>

#include "swarm/core/rng.hpp"

namespace swarm::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Parameter (or gradient) tensors of a network, in layer order:
/// W0, b0, W1, b1, ... Biases are stored as single-column matrices.
using ParamList = std::vector<Matrix>;

enum class OutputHead {
  Linear,
  Tanh,
  /// Output rows split into [mean; log-variance]; the log-variance half is
  /// clamped to [kMinLogVar, kMaxLogVar].
  Gaussian,
};

inline constexpr double kMinLogVar = -10.0;
inline constexpr double kMaxLogVar = 4.0;

/// Activations cached by a forward pass, consumed by backward().
struct Tape {
  std::vector<Matrix> inputs;  // input to each layer (post-activation of the previous)
  std::vector<Matrix> pre;     // pre-activation of each layer
  Matrix output;
};

/// Fully connected network with ReLU hidden layers. Batches are column-major:
/// each column is one sample.
class Mlp {
 public:
  Mlp() = default;
  /// `widths` = {input, hidden..., output}. For a Gaussian head the output
  /// width is 2k (k means followed by k log-variances).
  Mlp(std::vector<int> widths, OutputHead head, Rng& rng);
  /// Network with explicit parameters (testing and deserialization).
  Mlp(std::vector<int> widths, OutputHead head, ParamList params);

  Matrix forward(const Matrix& x) const;
  Matrix forward(const Matrix& x, Tape& tape) const;
  Vector forward_one(const Vector& x) const { return forward(Matrix(x)).col(0); }

  /// Reverse-mode gradients of sum(d_out .* output) w.r.t. the parameters.
  /// When `d_input` is non-null it receives the gradient w.r.t. the input.
  /// `d_logits`, if given, is added to the gradient at the last pre-activation.
  ParamList backward(const Tape& tape, const Matrix& d_out, Matrix* d_input = nullptr,
                     const Matrix* d_logits = nullptr) const;

  ParamList& params() { return params_; }
  const ParamList& params() const { return params_; }
  const std::vector<int>& widths() const { return widths_; }
  OutputHead head() const { return head_; }
  int input_width() const { return widths_.front(); }
  int output_width() const { return widths_.back(); }
  int layers() const { return static_cast<int>(widths_.size()) - 1; }

  ParamList zeros_like() const;

 private:
  void check_input(const Matrix& x) const;

  std::vector<int> widths_;
  OutputHead head_ = OutputHead::Linear;
  ParamList params_;
};

/// target <- (1 - zeta) * target + zeta * online, elementwise.
void soft_update(ParamList& target, const ParamList& online, double zeta);

bool all_finite(const ParamList& params);

}  // namespace swarm::nn
