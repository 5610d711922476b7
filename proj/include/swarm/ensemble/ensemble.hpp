#pragma once

#include <cstdint>
#include <vector>

#include "swarm/nn/adam.hpp"
#include "swarm/nn/checkpoint.hpp"
#include "swarm/nn/replay_buffer.hpp"

namespace swarm::ensemble {

/// Mean and variance of a uniform mixture of Gaussians, per output dimension.
struct MixtureMoments {
  nn::Vector mean;
  nn::Vector variance;
};

/// `means` and `variances` are (dims x members).
MixtureMoments mixture_moments(const nn::Matrix& means, const nn::Matrix& variances);

/// Arithmetic mean of the mixture variance over output dimensions.
double uncertainty(const MixtureMoments& m);

/// What the interaction mechanism needs from a learned model: a mean
/// prediction of the next summary and the reward, and the scalar V̂ of the
/// input it was asked about.
struct ModelPrediction {
  nn::Vector next_summary;
  double reward = 0.0;
  double uncertainty = 0.0;
};

class TransitionModel {
 public:
  virtual ~TransitionModel() = default;
  virtual ModelPrediction predict(const nn::Vector& summary) const = 0;
  virtual double uncertainty(const nn::Vector& summary) const = 0;
};

/// Running per-dimension mean and variance (Welford).
class Standardizer {
 public:
  Standardizer() = default;
  explicit Standardizer(int dims);

  void observe(const nn::Vector& x);
  nn::Vector mean() const { return mean_; }
  nn::Vector stddev() const;
  double count() const { return count_; }
  nn::Matrix normalize(const nn::Matrix& x) const;
  nn::Vector denormalize(const nn::Vector& z) const;

  void save(nn::Checkpoint& ck, const std::string& prefix) const;
  void load(const nn::Checkpoint& ck, const std::string& prefix);

 private:
  double count_ = 0.0;
  nn::Vector mean_, m2_;
};

struct ModelSample {
  nn::Vector input;
  nn::Vector target;  // [next summary; reward]
};

struct EnsembleConfig {
  int members = 5;
  std::vector<int> hidden{128, 128};
  double lr = 1e-3;
  std::size_t batch = 128;
  std::size_t capacity = 50000;
};

/// B Gaussian networks, each trained by negative log-likelihood on its own
/// bootstrap resample. Targets are standardized with running statistics, so
/// V̂ is measured in units of the observed target spread.
class Ensemble : public TransitionModel {
 public:
  Ensemble() = default;
  Ensemble(int input_width, int output_width, EnsembleConfig config, std::uint64_t seed);

  int members() const { return static_cast<int>(nets_.size()); }
  int output_width() const { return output_width_; }
  const EnsembleConfig& config() const { return config_; }
  nn::Mlp& member(int b) { return nets_[static_cast<std::size_t>(b)]; }
  const nn::Mlp& member(int b) const { return nets_[static_cast<std::size_t>(b)]; }
  const Standardizer& standardizer() const { return standardizer_; }

  /// Mixture moments in standardized target units.
  MixtureMoments moments(const nn::Vector& input) const;
  double uncertainty(const nn::Vector& input) const override;
  /// Mixture mean mapped back to raw units. The last target row is the reward.
  ModelPrediction predict(const nn::Vector& input) const override;

  void push(ModelSample sample);
  std::size_t buffer_size() const { return buffer_.size(); }

  /// One NLL step per member on a bootstrap draw from the buffer. Returns
  /// the mean pre-step loss, 0 when the buffer is empty.
  double update();
  /// One NLL step per member on its own resample (with replacement) of the
  /// given raw inputs / targets (one sample per column).
  double update_on(const nn::Matrix& inputs, const nn::Matrix& targets);

  void save(nn::Checkpoint& ck, const std::string& prefix, bool with_buffer) const;
  void load(const nn::Checkpoint& ck, const std::string& prefix);

 private:
  double member_step(int b, const nn::Matrix& x, const nn::Matrix& y);

  EnsembleConfig config_;
  int output_width_ = 0;
  std::vector<nn::Mlp> nets_;
  std::vector<nn::Adam> opts_;
  std::vector<Rng> bootstrap_;
  Standardizer standardizer_;
  nn::ReplayBuffer<ModelSample> buffer_;
};

/// Per-sample Gaussian NLL summed over dimensions: ½ log σ² + (d − μ)²/(2σ²).
double gaussian_nll(const nn::Vector& mean, const nn::Vector& log_var, const nn::Vector& target);

}  // namespace swarm::ensemble
