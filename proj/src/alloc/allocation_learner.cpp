#include "swarm/alloc/allocation_learner.hpp"

#include <limits>

#include "swarm/core/error.hpp"

namespace swarm::alloc {

namespace {

std::vector<int> layer_widths(const DqnConfig& c) {
  std::vector<int> w{kCandidateWidth};
  w.insert(w.end(), c.hidden.begin(), c.hidden.end());
  w.push_back(1);
  return w;
}

}  // namespace

AllocationLearner::AllocationLearner(DqnConfig config, std::uint64_t seed)
    : config_(std::move(config)), buffer_(config_.capacity, derive_seed(seed, 7)) {
  Rng init(derive_seed(seed, 3));
  online_ = nn::Mlp(layer_widths(config_), nn::OutputHead::Linear, init);
  target_ = online_;
  adam_ = nn::Adam(online_.params(), nn::AdamConfig{config_.lr});
}

nn::Vector AllocationLearner::q_values(const nn::Matrix& candidates) const {
  if (candidates.cols() == 0) return nn::Vector();
  return online_.forward(candidates).row(0).transpose();
}

int AllocationLearner::select(const CandidateSet& candidates, double epsilon, Rng& rng) const {
  if (candidates.empty()) throw Error(ErrorKind::RoundComplete, "no active evader to allocate");
  const double draw = rng.uniform();
  if (draw < epsilon) return static_cast<int>(rng.index(static_cast<std::size_t>(candidates.size())));
  const nn::Vector q = q_values(candidates.features);
  int best = 0;
  for (int k = 1; k < q.size(); ++k)
    if (q[k] > q[best]) best = k;
  return best;
}

int AllocationLearner::select_target(const ArenaConfig& config, const WorldState& world,
                                     const AllocationMatrix& alloc, int pursuer,
                                     double epsilon, Rng& rng) const {
  const CandidateSet set = build_candidates(config, world, alloc, pursuer);
  return set.evaders[static_cast<std::size_t>(select(set, epsilon, rng))];
}

void AllocationLearner::push(UpperTransition transition) {
  if (!std::isfinite(transition.reward))
    throw Error(ErrorKind::Divergence, "non-finite allocation reward");
  buffer_.push(std::move(transition));
}

std::vector<const UpperTransition*> AllocationLearner::sample_batch() {
  return buffer_.sample(config_.batch);
}

double AllocationLearner::bootstrap_value(const UpperTransition& t) const {
  if (t.terminal || t.next_candidates.cols() == 0) return 0.0;
  return target_.forward(t.next_candidates).maxCoeff();
}

QRegression AllocationLearner::dqn_regression(
    const std::vector<const UpperTransition*>& batch) const {
  QRegression problem;
  const auto n = static_cast<Eigen::Index>(batch.size());
  problem.features.resize(kCandidateWidth, n);
  problem.targets.resize(n);
  problem.weights = nn::Vector::Ones(n);
  problem.transitions = batch.size();
  for (Eigen::Index k = 0; k < n; ++k) {
    const UpperTransition& t = *batch[static_cast<std::size_t>(k)];
    problem.features.col(k) = t.chosen;
    problem.targets[k] = scaled(t.reward) + config_.gamma * bootstrap_value(t);
  }
  return problem;
}

double AllocationLearner::regression_loss(const QRegression& problem) const {
  if (problem.transitions == 0) return 0.0;
  const nn::Vector q = online_.forward(problem.features).row(0).transpose();
  const nn::Vector err = q - problem.targets;
  return problem.weights.dot(err.cwiseAbs2()) / static_cast<double>(problem.transitions);
}

double AllocationLearner::fit(const QRegression& problem) {
  if (problem.transitions == 0) return 0.0;
  nn::Tape tape;
  const nn::Vector q = online_.forward(problem.features, tape).row(0).transpose();
  const nn::Vector err = q - problem.targets;
  const double denom = static_cast<double>(problem.transitions);
  const double loss = problem.weights.dot(err.cwiseAbs2()) / denom;
  if (!std::isfinite(loss)) throw Error(ErrorKind::Divergence, "non-finite allocation Q loss");
  const nn::Matrix d_out = (2.0 / denom * problem.weights.cwiseProduct(err)).transpose();
  const nn::ParamList grads = online_.backward(tape, d_out);
  adam_.step(online_.params(), grads);
  nn::soft_update(target_.params(), online_.params(), config_.zeta);
  return loss;
}

double AllocationLearner::dqn_update() {
  if (buffer_.empty()) return 0.0;
  return fit(dqn_regression(sample_batch()));
}

void AllocationLearner::save(nn::Checkpoint& ck, const std::string& prefix,
                             bool with_buffer) const {
  ck.put_mlp(prefix + "/online", online_);
  ck.put_mlp(prefix + "/target", target_);
  ck.put_adam(prefix + "/adam", adam_);
  if (!with_buffer) return;
  const auto& items = buffer_.items();
  const auto n = static_cast<Eigen::Index>(items.size());
  nn::Matrix chosen(kCandidateWidth, n), scalars(3, n);
  Eigen::Index total_next = 0;
  for (const auto& t : items) total_next += t.next_candidates.cols();
  nn::Matrix next(kCandidateWidth, total_next);
  const Eigen::Index summary_rows = items.empty() ? 0 : items.front().summary.size();
  nn::Matrix summaries(summary_rows, n), next_summaries(summary_rows, n);
  Eigen::Index cursor = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const UpperTransition& t = items[static_cast<std::size_t>(k)];
    chosen.col(k) = t.chosen;
    scalars(0, k) = t.reward;
    scalars(1, k) = t.terminal ? 1.0 : 0.0;
    scalars(2, k) = static_cast<double>(t.next_candidates.cols());
    if (t.next_candidates.cols() > 0) {
      next.middleCols(cursor, t.next_candidates.cols()) = t.next_candidates;
      cursor += t.next_candidates.cols();
    }
    if (summary_rows > 0) {
      summaries.col(k) = t.summary;
      next_summaries.col(k) = t.next_summary;
    }
  }
  ck.put(prefix + "/buffer/chosen", chosen);
  ck.put(prefix + "/buffer/scalars", scalars);
  ck.put(prefix + "/buffer/next", next);
  ck.put(prefix + "/buffer/summary", summaries);
  ck.put(prefix + "/buffer/next_summary", next_summaries);
  ck.put_string(prefix + "/buffer/head", std::to_string(buffer_.head()));
  ck.put_string(prefix + "/buffer/rng", buffer_.rng().serialize());
}

void AllocationLearner::load(const nn::Checkpoint& ck, const std::string& prefix) {
  online_ = ck.mlp(prefix + "/online");
  target_ = ck.mlp(prefix + "/target");
  if (online_.input_width() != kCandidateWidth)
    throw Error(ErrorKind::IncompatibleEncoding,
                "allocation network expects " + std::to_string(online_.input_width()) +
                    " candidate features, this build encodes " +
                    std::to_string(kCandidateWidth));
  adam_ = ck.adam(prefix + "/adam");
  if (!ck.has(prefix + "/buffer/chosen")) return;
  const nn::Matrix& chosen = ck.tensor(prefix + "/buffer/chosen");
  const nn::Matrix& scalars = ck.tensor(prefix + "/buffer/scalars");
  const nn::Matrix& next = ck.tensor(prefix + "/buffer/next");
  const nn::Matrix& summaries = ck.tensor(prefix + "/buffer/summary");
  const nn::Matrix& next_summaries = ck.tensor(prefix + "/buffer/next_summary");
  std::vector<UpperTransition> items;
  Eigen::Index cursor = 0;
  for (Eigen::Index k = 0; k < chosen.cols(); ++k) {
    UpperTransition t;
    t.chosen = chosen.col(k);
    t.reward = scalars(0, k);
    t.terminal = scalars(1, k) != 0.0;
    const auto count = static_cast<Eigen::Index>(scalars(2, k));
    t.next_candidates = next.middleCols(cursor, count);
    cursor += count;
    if (summaries.rows() > 0) {
      t.summary = summaries.col(k);
      t.next_summary = next_summaries.col(k);
    }
    items.push_back(std::move(t));
  }
  buffer_.restore(std::move(items), std::stoul(ck.string(prefix + "/buffer/head")));
  buffer_.rng().deserialize(ck.string(prefix + "/buffer/rng"));
}

}  // namespace swarm::alloc
