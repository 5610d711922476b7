#include "swarm/train/trainer.hpp"

#include <algorithm>
#include <chrono>

#include "swarm/core/error.hpp"
#include "swarm/ensemble/summary.hpp"
#include "swarm/interaction/imve.hpp"

namespace swarm::train {

const char* to_string(Phase p) {
  switch (p) {
    case Phase::PretrainUpper: return "pretrain-upper";
    case Phase::PretrainLower: return "pretrain-lower";
    case Phase::Cross: return "cross-train";
  }
  return "?";
}

Phase phase_from_string(const std::string& s) {
  if (s == "pretrain-upper") return Phase::PretrainUpper;
  if (s == "pretrain-lower") return Phase::PretrainLower;
  if (s == "cross-train") return Phase::Cross;
  throw Error(ErrorKind::Config, "unknown phase '" + s + "'");
}

std::vector<WorldState> make_pool(const Arena& arena, std::uint64_t seed, int count) {
  std::vector<WorldState> pool;
  pool.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k)
    pool.push_back(arena.generate_instance(derive_seed(seed, static_cast<std::uint64_t>(k))));
  return pool;
}

Trainer::Trainer(ExperimentConfig config)
    : config_(std::move(config)),
      arena_(config_.arena),
      explore_(derive_seed(config_.train.seed, 21)) {
  config_.validate();
  const TrainConfig& t = config_.train;
  pool_ = make_pool(arena_, t.seed, t.instance_pool);
  upper_ = alloc::AllocationLearner(t.upper, derive_seed(t.seed, 31));
  lower_ = plan::MaddpgLearner(config_.arena.n_pursuers, t.lower, derive_seed(t.seed, 32));
  model_ = ensemble::Ensemble(kSummaryWidth, kSummaryWidth + 1, t.model, derive_seed(t.seed, 33));
}

int Trainer::planned(Phase p) const {
  const TrainConfig& t = config_.train;
  switch (p) {
    case Phase::PretrainUpper: return t.skip_upper_pretrain ? 0 : t.pretrain_upper_episodes;
    case Phase::PretrainLower: return t.skip_lower_pretrain ? 0 : t.pretrain_lower_episodes;
    case Phase::Cross: return t.cross_episodes;
  }
  return 0;
}

double Trainer::epsilon(int episode) const {
  const TrainConfig& t = config_.train;
  const double half = 0.5 * t.pretrain_upper_episodes;
  if (half <= 0.0 || episode >= half) return t.eps_end;
  return t.eps_start + (t.eps_end - t.eps_start) * (episode / half);
}

double Trainer::noise(int episode) const {
  const TrainConfig& t = config_.train;
  const int n = t.pretrain_lower_episodes;
  if (n <= 1) return t.noise_start;
  const double frac = std::min(1.0, static_cast<double>(episode) / (n - 1));
  return t.noise_start + (t.noise_end - t.noise_start) * frac;
}

int Trainer::greedy_column(const alloc::CandidateSet& set) const {
  const nn::Vector q = upper_.q_values(set.features);
  int best = 0;
  for (int k = 1; k < q.size(); ++k)
    if (q[k] > q[best]) best = k;
  return best;
}

int Trainer::fallback_choice(const alloc::CandidateSet& set) const {
  if (config_.train.skip_upper_pretrain) return alloc::greedy_capture_choice(set, config_.arena.length);
  return greedy_column(set);
}

StepPlan Trainer::plan_step(const nn::Vector& summary) const {
  StepPlan sp;
  sp.v_hat = model_.uncertainty(summary);
  sp.h = config_.train.fixed_h > 0 ? config_.train.fixed_h
                                   : interaction::adaptive_H(sp.v_hat, config_.interaction);
  sp.n = interaction::adaptive_N(sp.v_hat, config_.interaction);
  return sp;
}

TrainLogRow Trainer::pretrain_upper_episode() {
  const int e = progress_[0];
  const WorldState& world = pool_[static_cast<std::size_t>(e) % pool_.size()];
  const double eps = epsilon(e);
  upper_.set_reward_scale(config_.train.pretrain_upper_scale);
  const alloc::AllocationRound round = alloc::run_allocation_round(
      config_.arena, world, config_.train.omega1,
      [&](const alloc::CandidateSet& set, int) { return upper_.select(set, eps, explore_); });

  TrainLogRow row;
  row.phase = Phase::PretrainUpper;
  row.episode = e;
  const std::size_t n = round.decisions.size();
  for (std::size_t k = 0; k < n; ++k) {
    const alloc::AllocationDecision& d = round.decisions[k];
    alloc::UpperTransition t;
    t.chosen = d.chosen();
    t.reward = d.reward.total;
    t.terminal = k + 1 == n;
    t.next_candidates = t.terminal ? nn::Matrix(alloc::kCandidateWidth, 0)
                                   : round.decisions[k + 1].candidates.features;
    upper_.push(std::move(t));
    upper_.dqn_update();
    row.upper_return += d.reward.total;
  }
  ++progress_[0];
  return row;
}

EpisodeHooks Trainer::planner_hooks(double sigma) {
  EpisodeHooks hooks;
  hooks.act = [this, sigma](int i, const nn::Vector& obs) {
    return plan::actor_act(lower_.actor(i), obs, sigma, explore_, config_.arena.pursuer_vmax);
  };
  hooks.on_step = [this](const plan::LowerTransition& tr) {
    lower_.push(tr);
    if (++lower_steps_ % config_.train.lower_update_every == 0) lower_.update();
  };
  return hooks;
}

namespace {

TrainLogRow log_row(Phase phase, int episode, const EpisodeResult& r) {
  TrainLogRow row;
  row.phase = phase;
  row.episode = episode;
  row.upper_return = r.upper_return;
  row.lower_return = r.lower_return;
  row.win = r.win();
  row.captured = r.outcome.captured_count;
  row.reached = r.outcome.reached_count;
  row.steps = r.steps;
  return row;
}

}  // namespace

TrainLogRow Trainer::pretrain_lower_episode() {
  const int e = progress_[1];
  EpisodeHooks hooks = planner_hooks(noise(e));
  auto fallback = [this](const alloc::CandidateSet& set, int) { return fallback_choice(set); };
  hooks.allocate = fallback;
  hooks.reassign = fallback;
  // One allocation for the whole episode.
  hooks.plan_step = [this](const nn::Vector&) { return StepPlan{config_.arena.episode_len, 0.0, 1}; };
  const EpisodeResult r = run_episode(arena_, pool_[static_cast<std::size_t>(e) % pool_.size()],
                                      config_.train.omega1, config_.train.reward, hooks);
  ++progress_[1];
  return log_row(Phase::PretrainLower, e, r);
}

void Trainer::learn_interaction(InteractionRecord& rec, int episode,
                                std::vector<HTraceRow>* trace) {
  const TrainConfig& t = config_.train;
  const std::size_t n = rec.round.decisions.size();
  for (std::size_t k = 0; k < n; ++k) {
    alloc::UpperTransition tr;
    tr.chosen = rec.round.decisions[k].chosen();
    tr.reward = rec.total_rewards[k];
    const bool last = k + 1 == n;
    tr.terminal = last && rec.done;
    if (!last) {
      tr.next_candidates = rec.round.decisions[k + 1].candidates.features;
    } else {
      tr.next_candidates = rec.next_candidates.cols() > 0 ? rec.next_candidates
                                                          : nn::Matrix(alloc::kCandidateWidth, 0);
      if (rec.next_candidates.cols() == 0) tr.terminal = true;
    }
    tr.summary = rec.summary;
    tr.next_summary = rec.next_summary;
    upper_.push(std::move(tr));
  }

  double weight_sum = 0.0;
  int weight_count = 0;
  const int updates = t.upper_updates_per_round > 0 ? t.upper_updates_per_round : static_cast<int>(n);
  interaction::ImveSettings settings{config_.interaction, config_.arena.episode_len, t.fixed_h};
  for (int u = 0; u < updates && upper_.buffer_size() > 0; ++u) {
    if (t.disable_imve) {
      upper_.dqn_update();
      weight_sum += 1.0;
      ++weight_count;
    } else {
      const alloc::QRegression problem =
          interaction::imve_regression(upper_, model_, settings, upper_.sample_batch());
      upper_.fit(problem);
      weight_sum += problem.weights.sum();
      weight_count += static_cast<int>(problem.weights.size());
    }
  }

  if (n > 0 && rec.span > 0) {
    nn::Vector target(kSummaryWidth + 1);
    target.head(kSummaryWidth) = rec.next_summary;
    double mean_r = 0.0;
    for (double r : rec.total_rewards) mean_r += r;
    target[kSummaryWidth] = mean_r / static_cast<double>(n);
    model_.push({rec.summary, target});
    for (int u = 0; u < t.model_updates_per_round; ++u) model_.update();
  }

  if (trace && !rec.round.decisions.empty()) {
    HTraceRow row;
    row.episode = episode;
    row.t = rec.t0;
    row.v_hat = rec.v_hat;
    row.h = rec.h;
    row.span = rec.span;
    row.n = t.disable_imve ? 1 : rec.n;
    row.mean_weight = weight_count > 0 ? weight_sum / weight_count : 1.0;
    trace->push_back(row);
  }
}

TrainLogRow Trainer::cross_episode(std::vector<HTraceRow>* trace) {
  const int e = progress_[2];
  const TrainConfig& t = config_.train;
  if (e == 0) {
    // The upper reward changes meaning from r_allo to r_total here.
    upper_.clear_buffer();
  }
  upper_.set_reward_scale(t.cross_upper_scale);
  EpisodeHooks hooks = planner_hooks(t.noise_end);
  hooks.allocate = [this](const alloc::CandidateSet& set, int) {
    return upper_.select(set, config_.train.cross_eps, explore_);
  };
  hooks.reassign = [this](const alloc::CandidateSet& set, int) { return greedy_column(set); };
  hooks.plan_step = [this](const nn::Vector& s) { return plan_step(s); };
  hooks.on_interaction = [this, e, trace](InteractionRecord& rec) { learn_interaction(rec, e, trace); };
  const EpisodeResult r = run_episode(arena_, pool_[static_cast<std::size_t>(e) % pool_.size()],
                                      t.omega1, t.reward, hooks);
  ++progress_[2];
  return log_row(Phase::Cross, e, r);
}

void Trainer::run_phase(Phase p, std::vector<TrainLogRow>& log, std::vector<HTraceRow>* trace,
                        std::vector<TimingRow>* timing) {
  using Clock = std::chrono::steady_clock;
  const int total = planned(p);
  while (progress(p) < total) {
    const auto start = Clock::now();
    TrainLogRow row;
    switch (p) {
      case Phase::PretrainUpper: row = pretrain_upper_episode(); break;
      case Phase::PretrainLower: row = pretrain_lower_episode(); break;
      case Phase::Cross: row = cross_episode(trace); break;
    }
    log.push_back(row);
    if (timing)
      timing->push_back({p, row.episode, std::chrono::duration<double>(Clock::now() - start).count()});
  }
}

void Trainer::save(const std::string& path) const {
  nn::Checkpoint ck;
  ck.put_string("trainer/config_hash", config_hash(config_));
  ck.put_string("trainer/n_pursuers", std::to_string(config_.arena.n_pursuers));
  for (int p = 0; p < 3; ++p)
    ck.put_string("trainer/progress/" + std::to_string(p), std::to_string(progress_[p]));
  ck.put_string("trainer/lower_steps", std::to_string(lower_steps_));
  ck.put_string("trainer/explore", explore_.serialize());
  upper_.save(ck, "upper", true);
  lower_.save(ck, "lower", true);
  model_.save(ck, "model", true);
  ck.save(path);
}

void Trainer::load(const std::string& path) {
  const nn::Checkpoint ck = nn::Checkpoint::load(path);
  const int n = std::stoi(ck.string("trainer/n_pursuers"));
  if (n != config_.arena.n_pursuers)
    throw Error(ErrorKind::IncompatibleEncoding,
                "checkpoint was trained for " + std::to_string(n) + " pursuers, config has " +
                    std::to_string(config_.arena.n_pursuers));
  for (int p = 0; p < 3; ++p)
    progress_[p] = std::stoi(ck.string("trainer/progress/" + std::to_string(p)));
  lower_steps_ = std::stoi(ck.string("trainer/lower_steps"));
  explore_.deserialize(ck.string("trainer/explore"));
  upper_.load(ck, "upper");
  lower_.load(ck, "lower");
  model_.load(ck, "model");
}

}  // namespace swarm::train
