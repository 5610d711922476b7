#include "swarm/plan/maddpg.hpp"

#include "swarm/core/error.hpp"

namespace swarm::plan {

namespace {

struct JointBatch {
  nn::Matrix x;       // [obs; actions] per column
  nn::Matrix next_obs;
  nn::Matrix rewards;  // I x B
  nn::Matrix active;   // I x B
  nn::Matrix next_active;
  nn::Vector terminal;
};

JointBatch assemble(const std::vector<const LowerTransition*>& batch, int agents) {
  const auto b = static_cast<Eigen::Index>(batch.size());
  const Eigen::Index obs_rows = static_cast<Eigen::Index>(agents) * kObservationWidth;
  const Eigen::Index act_rows = static_cast<Eigen::Index>(agents) * kActionWidth;
  JointBatch jb;
  jb.x.resize(obs_rows + act_rows, b);
  jb.next_obs.resize(obs_rows, b);
  jb.rewards.resize(agents, b);
  jb.active.resize(agents, b);
  jb.next_active.resize(agents, b);
  jb.terminal.resize(b);
  for (Eigen::Index c = 0; c < b; ++c) {
    const LowerTransition& t = *batch[static_cast<std::size_t>(c)];
    if (t.obs.cols() != agents)
      throw Error(ErrorKind::IncompatibleEncoding, "transition agent count mismatch");
    jb.x.col(c).head(obs_rows) = t.obs.reshaped();
    jb.x.col(c).tail(act_rows) = t.actions.reshaped();
    jb.next_obs.col(c) = t.next_obs.reshaped();
    jb.rewards.col(c) = t.rewards;
    for (int i = 0; i < agents; ++i) {
      jb.active(i, c) = t.active[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
      jb.next_active(i, c) = t.next_active[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
    }
    jb.terminal[c] = t.terminal ? 1.0 : 0.0;
  }
  return jb;
}

nn::Matrix pack_flags(const std::vector<std::uint8_t>& flags) {
  nn::Matrix m(static_cast<Eigen::Index>(flags.size()), 1);
  for (std::size_t k = 0; k < flags.size(); ++k) m(static_cast<Eigen::Index>(k), 0) = flags[k];
  return m;
}

}  // namespace

MaddpgLearner::MaddpgLearner(int agents, MaddpgConfig config, std::uint64_t seed)
    : config_(std::move(config)), buffer_(config_.capacity, derive_seed(seed, 11)) {
  if (agents < 1) throw Error(ErrorKind::Config, "maddpg needs at least one agent");
  Rng init(derive_seed(seed, 5));
  std::vector<int> actor_w{kObservationWidth};
  actor_w.insert(actor_w.end(), config_.hidden.begin(), config_.hidden.end());
  actor_w.push_back(kActionWidth);
  std::vector<int> critic_w{agents * (kObservationWidth + kActionWidth)};
  critic_w.insert(critic_w.end(), config_.hidden.begin(), config_.hidden.end());
  critic_w.push_back(1);
  for (int i = 0; i < agents; ++i) {
    actors_.emplace_back(actor_w, nn::OutputHead::Tanh, init);
    critics_.emplace_back(critic_w, nn::OutputHead::Linear, init);
    actor_opt_.emplace_back(actors_.back().params(), nn::AdamConfig{config_.lr});
    critic_opt_.emplace_back(critics_.back().params(), nn::AdamConfig{config_.lr});
  }
  actor_targets_ = actors_;
  critic_targets_ = critics_;
}

void MaddpgLearner::push(LowerTransition transition) {
  if (!transition.rewards.allFinite())
    throw Error(ErrorKind::Divergence, "non-finite path reward");
  buffer_.push(std::move(transition));
}

MaddpgStats MaddpgLearner::update() {
  if (buffer_.size() < config_.batch || buffer_.empty()) return {};
  return update_on(buffer_.sample(config_.batch));
}

nn::Vector MaddpgLearner::critic_targets(const std::vector<const LowerTransition*>& batch,
                                         int agent) const {
  const int n = agents();
  const JointBatch jb = assemble(batch, n);
  const Eigen::Index b = jb.x.cols();
  const Eigen::Index obs_rows = static_cast<Eigen::Index>(n) * kObservationWidth;
  nn::Matrix next_x(jb.x.rows(), b);
  next_x.topRows(obs_rows) = jb.next_obs;
  for (int k = 0; k < n; ++k) {
    nn::Matrix a = actor_targets_[static_cast<std::size_t>(k)].forward(
        jb.next_obs.middleRows(static_cast<Eigen::Index>(k) * kObservationWidth, kObservationWidth));
    for (Eigen::Index c = 0; c < b; ++c)
      if (jb.next_active(k, c) == 0.0) a.col(c).setZero();
    next_x.middleRows(obs_rows + static_cast<Eigen::Index>(k) * kActionWidth, kActionWidth) = a;
  }
  const nn::Matrix q_next = critic_targets_[static_cast<std::size_t>(agent)].forward(next_x);
  nn::Vector y(b);
  for (Eigen::Index c = 0; c < b; ++c) {
    const bool done = jb.terminal[c] != 0.0 || jb.next_active(agent, c) == 0.0;
    y[c] = config_.reward_scale * jb.rewards(agent, c) +
           (done ? 0.0 : config_.gamma * q_next(0, c));
  }
  return y;
}

MaddpgStats MaddpgLearner::update_on(const std::vector<const LowerTransition*>& batch) {
  MaddpgStats stats;
  if (batch.empty()) return stats;
  const int n = agents();
  const JointBatch jb = assemble(batch, n);
  const Eigen::Index b = jb.x.cols();
  const Eigen::Index obs_rows = static_cast<Eigen::Index>(n) * kObservationWidth;

  // Target actions are shared by every critic target.
  nn::Matrix next_x(jb.x.rows(), b);
  next_x.topRows(obs_rows) = jb.next_obs;
  for (int k = 0; k < n; ++k) {
    nn::Matrix a = actor_targets_[static_cast<std::size_t>(k)].forward(
        jb.next_obs.middleRows(static_cast<Eigen::Index>(k) * kObservationWidth, kObservationWidth));
    for (Eigen::Index c = 0; c < b; ++c)
      if (jb.next_active(k, c) == 0.0) a.col(c).setZero();
    next_x.middleRows(obs_rows + static_cast<Eigen::Index>(k) * kActionWidth, kActionWidth) = a;
  }

  stats.updated = true;
  stats.critic_loss.assign(static_cast<std::size_t>(n), 0.0);
  stats.actor_loss.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const nn::Vector mask = jb.active.row(i).transpose();
    const double count = mask.sum();
    if (count == 0.0) continue;

    // critic
    const nn::Matrix q_next = critic_targets_[idx].forward(next_x);
    nn::Vector y(b);
    for (Eigen::Index c = 0; c < b; ++c) {
      const bool done = jb.terminal[c] != 0.0 || jb.next_active(i, c) == 0.0;
      y[c] = config_.reward_scale * jb.rewards(i, c) + (done ? 0.0 : config_.gamma * q_next(0, c));
    }
    nn::Tape critic_tape;
    const nn::Vector q = critics_[idx].forward(jb.x, critic_tape).row(0).transpose();
    const nn::Vector err = (q - y).cwiseProduct(mask);
    stats.critic_loss[idx] = err.squaredNorm() / count;
    if (!std::isfinite(stats.critic_loss[idx]))
      throw Error(ErrorKind::Divergence, "non-finite critic loss");
    const nn::Matrix d_q = (2.0 / count * err).transpose();
    critic_opt_[idx].step(critics_[idx].params(), critics_[idx].backward(critic_tape, d_q));

    // actor: substitute own action, ascend Q
    nn::Tape actor_tape;
    const nn::Matrix u = actors_[idx].forward(
        jb.x.middleRows(static_cast<Eigen::Index>(i) * kObservationWidth, kObservationWidth),
        actor_tape);
    nn::Matrix x_pi = jb.x;
    const Eigen::Index act_row = obs_rows + static_cast<Eigen::Index>(i) * kActionWidth;
    x_pi.middleRows(act_row, kActionWidth) = u;
    nn::Tape policy_tape;
    const nn::Vector q_pi = critics_[idx].forward(x_pi, policy_tape).row(0).transpose();
    stats.actor_loss[idx] = -mask.dot(q_pi) / count;
    const nn::Matrix d_qpi = (-1.0 / count * mask).transpose();
    nn::Matrix d_x;
    critics_[idx].backward(policy_tape, d_qpi, &d_x);
    const nn::Matrix d_u = d_x.middleRows(act_row, kActionWidth);
    const nn::Matrix& z = actor_tape.pre.back();
    const nn::Matrix d_z =
        (2.0 * config_.logit_reg / (count * kActionWidth)) * z * mask.asDiagonal();
    stats.actor_loss[idx] += config_.logit_reg * (z * mask.asDiagonal()).squaredNorm() /
                             (count * kActionWidth);
    actor_opt_[idx].step(actors_[idx].params(), actors_[idx].backward(actor_tape, d_u, nullptr, &d_z));
  }
  for (int i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    nn::soft_update(critic_targets_[idx].params(), critics_[idx].params(), config_.zeta);
    nn::soft_update(actor_targets_[idx].params(), actors_[idx].params(), config_.zeta);
  }
  return stats;
}

void MaddpgLearner::save(nn::Checkpoint& ck, const std::string& prefix, bool with_buffer) const {
  ck.put_string(prefix + "/agents", std::to_string(agents()));
  for (int i = 0; i < agents(); ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const std::string p = prefix + "/" + std::to_string(i);
    ck.put_mlp(p + "/actor", actors_[idx]);
    ck.put_mlp(p + "/actor_target", actor_targets_[idx]);
    ck.put_mlp(p + "/critic", critics_[idx]);
    ck.put_mlp(p + "/critic_target", critic_targets_[idx]);
    ck.put_adam(p + "/actor_adam", actor_opt_[idx]);
    ck.put_adam(p + "/critic_adam", critic_opt_[idx]);
  }
  if (!with_buffer) return;
  const auto& items = buffer_.items();
  const auto n = static_cast<Eigen::Index>(items.size());
  const Eigen::Index a = agents();
  nn::Matrix obs(a * kObservationWidth, n), next(a * kObservationWidth, n),
      act(a * kActionWidth, n), rew(a, n), flags(2 * a + 1, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    const LowerTransition& t = items[static_cast<std::size_t>(c)];
    obs.col(c) = t.obs.reshaped();
    next.col(c) = t.next_obs.reshaped();
    act.col(c) = t.actions.reshaped();
    rew.col(c) = t.rewards;
    flags.col(c).head(a) = pack_flags(t.active).col(0);
    flags.col(c).segment(a, a) = pack_flags(t.next_active).col(0);
    flags(2 * a, c) = t.terminal ? 1.0 : 0.0;
  }
  ck.put(prefix + "/buffer/obs", obs);
  ck.put(prefix + "/buffer/next_obs", next);
  ck.put(prefix + "/buffer/actions", act);
  ck.put(prefix + "/buffer/rewards", rew);
  ck.put(prefix + "/buffer/flags", flags);
  ck.put_string(prefix + "/buffer/head", std::to_string(buffer_.head()));
  ck.put_string(prefix + "/buffer/rng", buffer_.rng().serialize());
}

void MaddpgLearner::load(const nn::Checkpoint& ck, const std::string& prefix) {
  const int n = std::stoi(ck.string(prefix + "/agents"));
  actors_.clear();
  actor_targets_.clear();
  critics_.clear();
  critic_targets_.clear();
  actor_opt_.clear();
  critic_opt_.clear();
  for (int i = 0; i < n; ++i) {
    const std::string p = prefix + "/" + std::to_string(i);
    actors_.push_back(ck.mlp(p + "/actor"));
    actor_targets_.push_back(ck.mlp(p + "/actor_target"));
    critics_.push_back(ck.mlp(p + "/critic"));
    critic_targets_.push_back(ck.mlp(p + "/critic_target"));
    actor_opt_.push_back(ck.adam(p + "/actor_adam"));
    critic_opt_.push_back(ck.adam(p + "/critic_adam"));
    if (actors_.back().input_width() != kObservationWidth)
      throw Error(ErrorKind::IncompatibleEncoding, "actor observation width mismatch");
  }
  if (!ck.has(prefix + "/buffer/obs")) return;
  const nn::Matrix& obs = ck.tensor(prefix + "/buffer/obs");
  const nn::Matrix& next = ck.tensor(prefix + "/buffer/next_obs");
  const nn::Matrix& act = ck.tensor(prefix + "/buffer/actions");
  const nn::Matrix& rew = ck.tensor(prefix + "/buffer/rewards");
  const nn::Matrix& flags = ck.tensor(prefix + "/buffer/flags");
  std::vector<LowerTransition> items;
  for (Eigen::Index c = 0; c < obs.cols(); ++c) {
    LowerTransition t;
    t.obs = obs.col(c).reshaped(kObservationWidth, n);
    t.next_obs = next.col(c).reshaped(kObservationWidth, n);
    t.actions = act.col(c).reshaped(kActionWidth, n);
    t.rewards = rew.col(c);
    for (int i = 0; i < n; ++i) {
      t.active.push_back(flags(i, c) != 0.0);
      t.next_active.push_back(flags(n + i, c) != 0.0);
    }
    t.terminal = flags(2 * n, c) != 0.0;
    items.push_back(std::move(t));
  }
  buffer_.restore(std::move(items), std::stoul(ck.string(prefix + "/buffer/head")));
  buffer_.rng().deserialize(ck.string(prefix + "/buffer/rng"));
}

}  // namespace swarm::plan
