#include "swarm/ensemble/ensemble.hpp"

#include <cmath>

#include "swarm/core/error.hpp"

namespace swarm::ensemble {

MixtureMoments mixture_moments(const nn::Matrix& means, const nn::Matrix& variances) {
  const double b = static_cast<double>(means.cols());
  MixtureMoments m;
  m.mean = means.rowwise().sum() / b;
  const nn::Vector second = (variances + means.cwiseAbs2()).rowwise().sum() / b;
  m.variance = (second - m.mean.cwiseAbs2()).cwiseMax(0.0);
  return m;
}

double uncertainty(const MixtureMoments& m) {
  if (m.variance.size() == 0) return 0.0;
  return m.variance.mean();
}

double gaussian_nll(const nn::Vector& mean, const nn::Vector& log_var, const nn::Vector& target) {
  const nn::Vector err = target - mean;
  return (0.5 * log_var.array() + err.array().square() / (2.0 * log_var.array().exp())).sum();
}

Standardizer::Standardizer(int dims) : mean_(nn::Vector::Zero(dims)), m2_(nn::Vector::Zero(dims)) {}

void Standardizer::observe(const nn::Vector& x) {
  count_ += 1.0;
  const nn::Vector delta = x - mean_;
  mean_ += delta / count_;
  m2_ += delta.cwiseProduct(x - mean_);
}

nn::Vector Standardizer::stddev() const {
  if (count_ < 2.0) return nn::Vector::Ones(mean_.size());
  return (m2_ / count_).cwiseSqrt().cwiseMax(1e-6);
}

nn::Matrix Standardizer::normalize(const nn::Matrix& x) const {
  const nn::Vector inv = stddev().cwiseInverse();
  return (x.colwise() - mean_).array().colwise() * inv.array();
}

nn::Vector Standardizer::denormalize(const nn::Vector& z) const {
  return z.cwiseProduct(stddev()) + mean_;
}

void Standardizer::save(nn::Checkpoint& ck, const std::string& prefix) const {
  nn::Matrix m(mean_.size(), 3);
  m.col(0) = mean_;
  m.col(1) = m2_;
  m.col(2).setConstant(count_);
  ck.put(prefix, m);
}

void Standardizer::load(const nn::Checkpoint& ck, const std::string& prefix) {
  const nn::Matrix& m = ck.tensor(prefix);
  mean_ = m.col(0);
  m2_ = m.col(1);
  count_ = m.rows() > 0 ? m(0, 2) : 0.0;
}

Ensemble::Ensemble(int input_width, int output_width, EnsembleConfig config, std::uint64_t seed)
    : config_(std::move(config)),
      output_width_(output_width),
      standardizer_(output_width),
      buffer_(config_.capacity, derive_seed(seed, 13)) {
  if (config_.members < 2) throw Error(ErrorKind::Config, "ensemble needs at least two members");
  std::vector<int> widths{input_width};
  widths.insert(widths.end(), config_.hidden.begin(), config_.hidden.end());
  widths.push_back(2 * output_width);
  for (int b = 0; b < config_.members; ++b) {
    Rng init(derive_seed(seed, 100 + static_cast<std::uint64_t>(b)));
    nets_.emplace_back(widths, nn::OutputHead::Gaussian, init);
    opts_.emplace_back(nets_.back().params(), nn::AdamConfig{config_.lr});
    bootstrap_.emplace_back(derive_seed(seed, 200 + static_cast<std::uint64_t>(b)));
  }
}

MixtureMoments Ensemble::moments(const nn::Vector& input) const {
  const int k = output_width_;
  nn::Matrix means(k, members()), vars(k, members());
  for (int b = 0; b < members(); ++b) {
    const nn::Vector out = nets_[static_cast<std::size_t>(b)].forward_one(input);
    means.col(b) = out.head(k);
    vars.col(b) = out.tail(k).array().exp();
  }
  return mixture_moments(means, vars);
}

double Ensemble::uncertainty(const nn::Vector& input) const {
  return ensemble::uncertainty(moments(input));
}

ModelPrediction Ensemble::predict(const nn::Vector& input) const {
  const MixtureMoments m = moments(input);
  const nn::Vector raw = standardizer_.denormalize(m.mean);
  ModelPrediction p;
  p.next_summary = raw.head(output_width_ - 1);
  p.reward = raw[output_width_ - 1];
  p.uncertainty = ensemble::uncertainty(m);
  return p;
}

void Ensemble::push(ModelSample sample) {
  if (!sample.input.allFinite() || !sample.target.allFinite())
    throw Error(ErrorKind::Divergence, "non-finite model sample");
  standardizer_.observe(sample.target);
  buffer_.push(std::move(sample));
}

double Ensemble::member_step(int b, const nn::Matrix& x, const nn::Matrix& y) {
  const auto idx = static_cast<std::size_t>(b);
  const int k = output_width_;
  const double n = static_cast<double>(x.cols()) * k;
  nn::Tape tape;
  const nn::Matrix out = nets_[idx].forward(x, tape);
  const auto log_var = out.bottomRows(k).array();
  const nn::Matrix inv_var = (-log_var).exp().matrix();
  const nn::Matrix err = y - out.topRows(k);
  const double loss =
      (0.5 * log_var + err.array().square() * inv_var.array() * 0.5).sum() / n;
  if (!std::isfinite(loss)) throw Error(ErrorKind::Divergence, "non-finite ensemble loss");
  nn::Matrix d_out(2 * k, x.cols());
  d_out.topRows(k) = (-err.array() * inv_var.array() / n).matrix();
  d_out.bottomRows(k) = ((0.5 - 0.5 * err.array().square() * inv_var.array()) / n).matrix();
  opts_[idx].step(nets_[idx].params(), nets_[idx].backward(tape, d_out));
  return loss;
}

double Ensemble::update() {
  if (buffer_.empty()) return 0.0;
  const std::size_t n = buffer_.size();
  const std::size_t batch = std::min(config_.batch, n);
  const int k = output_width_;
  const int in = nets_.front().input_width();
  double total = 0.0;
  for (int b = 0; b < members(); ++b) {
    nn::Matrix x(in, static_cast<Eigen::Index>(batch)), y(k, static_cast<Eigen::Index>(batch));
    for (std::size_t c = 0; c < batch; ++c) {
      const ModelSample& s = buffer_[bootstrap_[static_cast<std::size_t>(b)].index(n)];
      x.col(static_cast<Eigen::Index>(c)) = s.input;
      y.col(static_cast<Eigen::Index>(c)) = s.target;
    }
    total += member_step(b, x, standardizer_.normalize(y));
  }
  return total / members();
}

double Ensemble::update_on(const nn::Matrix& inputs, const nn::Matrix& targets) {
  if (inputs.cols() == 0) throw Error(ErrorKind::Config, "empty model batch");
  const auto n = static_cast<std::size_t>(inputs.cols());
  const nn::Matrix z = standardizer_.normalize(targets);
  double total = 0.0;
  for (int b = 0; b < members(); ++b) {
    nn::Matrix x(inputs.rows(), inputs.cols()), y(z.rows(), z.cols());
    for (Eigen::Index c = 0; c < inputs.cols(); ++c) {
      const auto pick = static_cast<Eigen::Index>(bootstrap_[static_cast<std::size_t>(b)].index(n));
      x.col(c) = inputs.col(pick);
      y.col(c) = z.col(pick);
    }
    total += member_step(b, x, y);
  }
  return total / members();
}

void Ensemble::save(nn::Checkpoint& ck, const std::string& prefix, bool with_buffer) const {
  ck.put_string(prefix + "/members", std::to_string(members()));
  ck.put_string(prefix + "/output_width", std::to_string(output_width_));
  for (int b = 0; b < members(); ++b) {
    const std::string p = prefix + "/" + std::to_string(b);
    ck.put_mlp(p + "/net", nets_[static_cast<std::size_t>(b)]);
    ck.put_adam(p + "/adam", opts_[static_cast<std::size_t>(b)]);
    ck.put_string(p + "/rng", bootstrap_[static_cast<std::size_t>(b)].serialize());
  }
  standardizer_.save(ck, prefix + "/standardizer");
  if (!with_buffer) return;
  const auto& items = buffer_.items();
  const int in = nets_.front().input_width();
  nn::Matrix x(in, static_cast<Eigen::Index>(items.size())),
      y(output_width_, static_cast<Eigen::Index>(items.size()));
  for (std::size_t c = 0; c < items.size(); ++c) {
    x.col(static_cast<Eigen::Index>(c)) = items[c].input;
    y.col(static_cast<Eigen::Index>(c)) = items[c].target;
  }
  ck.put(prefix + "/buffer/input", x);
  ck.put(prefix + "/buffer/target", y);
  ck.put_string(prefix + "/buffer/head", std::to_string(buffer_.head()));
  ck.put_string(prefix + "/buffer/rng", buffer_.rng().serialize());
}

void Ensemble::load(const nn::Checkpoint& ck, const std::string& prefix) {
  const int b_count = std::stoi(ck.string(prefix + "/members"));
  output_width_ = std::stoi(ck.string(prefix + "/output_width"));
  config_.members = b_count;
  nets_.clear();
  opts_.clear();
  bootstrap_.clear();
  for (int b = 0; b < b_count; ++b) {
    const std::string p = prefix + "/" + std::to_string(b);
    nets_.push_back(ck.mlp(p + "/net"));
    opts_.push_back(ck.adam(p + "/adam"));
    bootstrap_.emplace_back();
    bootstrap_.back().deserialize(ck.string(p + "/rng"));
  }
  standardizer_ = Standardizer(output_width_);
  standardizer_.load(ck, prefix + "/standardizer");
  if (!ck.has(prefix + "/buffer/input")) return;
  const nn::Matrix& x = ck.tensor(prefix + "/buffer/input");
  const nn::Matrix& y = ck.tensor(prefix + "/buffer/target");
  std::vector<ModelSample> items;
  for (Eigen::Index c = 0; c < x.cols(); ++c) items.push_back({x.col(c), y.col(c)});
  buffer_.restore(std::move(items), std::stoul(ck.string(prefix + "/buffer/head")));
  buffer_.rng().deserialize(ck.string(prefix + "/buffer/rng"));
}

}  // namespace swarm::ensemble
