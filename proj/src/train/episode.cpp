#include "swarm/train/episode.hpp"

#include <chrono>

#include "swarm/ensemble/summary.hpp"
#include "swarm/interaction/interaction.hpp"

namespace swarm::train {

double InteractionRecord::mean_alloc_reward() const {
  if (round.decisions.empty()) return 0.0;
  double s = 0.0;
  for (const auto& d : round.decisions) s += d.reward.total;
  return s / static_cast<double>(round.decisions.size());
}

double InteractionRecord::upper_return() const {
  return interaction::total_reward(span, mean_alloc_reward(), path_sum, captures);
}

namespace {

using Clock = std::chrono::steady_clock;

int first_unfrozen(const WorldState& w) {
  for (std::size_t i = 0; i < w.pursuers.size(); ++i)
    if (!w.pursuers[i].frozen) return static_cast<int>(i);
  return -1;
}

void reassign_orphans(const ArenaConfig& config, WorldState& w,
                      const alloc::CandidateChooser& choose) {
  for (std::size_t i = 0; i < w.pursuers.size(); ++i) {
    if (w.pursuers[i].frozen) continue;
    const int pursuer = static_cast<int>(i);
    const int target = w.allocation.target_of(pursuer);
    if (target >= 0 && w.evaders[static_cast<std::size_t>(target)].active()) continue;
    AllocationMatrix rest = w.allocation;
    rest.clear(pursuer);
    const alloc::CandidateSet set = alloc::build_candidates(config, w, rest, pursuer);
    if (set.empty()) continue;
    w.allocation.assign(pursuer, set.evaders[static_cast<std::size_t>(choose(set, pursuer))]);
  }
}

}  // namespace

EpisodeResult run_episode(const Arena& arena, WorldState world, double omega1,
                          const plan::RewardConstants& reward, EpisodeHooks& hooks) {
  const ArenaConfig& config = arena.config();
  const int n_p = static_cast<int>(world.pursuers.size());
  EpisodeResult result;
  double seconds = 0.0;
  int credited = 0;
  if (hooks.trajectory) hooks.trajectory->write(world);

  EpisodeOutcome outcome = arena.check_termination(world);
  while (true) {
    InteractionRecord rec;
    rec.t0 = world.t;
    auto t_start = Clock::now();
    if (!outcome.done()) {
      rec.round = alloc::run_allocation_round(config, world, omega1, hooks.allocate);
      world.allocation = rec.round.allocation;
    }
    rec.summary = global_summary(config, world);
    if (!outcome.done()) {
      const StepPlan sp = hooks.plan_step(rec.summary);
      rec.h = sp.h;
      rec.v_hat = sp.v_hat;
      rec.n = sp.n;
    }
    seconds += std::chrono::duration<double>(Clock::now() - t_start).count();

    std::vector<PursuerAction> actions(static_cast<std::size_t>(n_p));
    while (!outcome.done() && rec.span < rec.h) {
      plan::LowerTransition tr;
      tr.obs = nn::Matrix::Zero(plan::kObservationWidth, n_p);
      tr.actions = nn::Matrix::Zero(plan::kActionWidth, n_p);
      tr.rewards = nn::Vector::Zero(n_p);
      tr.next_obs = nn::Matrix::Zero(plan::kObservationWidth, n_p);
      tr.active.assign(static_cast<std::size_t>(n_p), 0);
      tr.next_active.assign(static_cast<std::size_t>(n_p), 0);

      t_start = Clock::now();
      for (int i = 0; i < n_p; ++i) {
        actions[static_cast<std::size_t>(i)] = PursuerAction{};
        if (world.pursuers[static_cast<std::size_t>(i)].frozen) continue;
        tr.active[static_cast<std::size_t>(i)] = 1;
        tr.obs.col(i) = plan::build_observation(config, world, i);
        const plan::ActorOutput out = hooks.act(i, tr.obs.col(i));
        tr.actions.col(i) = out.normalized;
        actions[static_cast<std::size_t>(i)] = out.action;
      }
      seconds += std::chrono::duration<double>(Clock::now() - t_start).count();

      arena.step(world, actions);
      ++rec.span;
      outcome = arena.check_termination(world);
      // The episode end is a truncation from a pursuer's point of view (nothing
      // in its observation tells how many steps remain), so bootstrap through
      // it. A pursuer's own capture still ends its stream via next_active.
      tr.terminal = false;
      for (int i = 0; i < n_p; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        if (!tr.active[idx]) continue;
        tr.rewards[i] = plan::pursuer_path_reward(config, world, i, reward);
        if (!world.pursuers[idx].frozen) {
          tr.next_active[idx] = 1;
          tr.next_obs.col(i) = plan::build_observation(config, world, i);
        }
      }
      rec.path_sum += tr.rewards.sum();
      if (hooks.on_step) hooks.on_step(tr);
      if (hooks.trajectory) hooks.trajectory->write(world);
      if (!outcome.done()) {
        t_start = Clock::now();
        reassign_orphans(config, world, hooks.reassign);
        seconds += std::chrono::duration<double>(Clock::now() - t_start).count();
      }
    }

    rec.captures = world.captured_count() - credited;
    credited = world.captured_count();
    rec.next_summary = global_summary(config, world);
    rec.done = outcome.done();
    for (const auto& d : rec.round.decisions)
      rec.total_rewards.push_back(
          interaction::total_reward(rec.span, d.reward.total, rec.path_sum, rec.captures));
    if (!rec.done) {
      const int first = first_unfrozen(world);
      if (first >= 0) {
        const AllocationMatrix empty(n_p, static_cast<int>(world.evaders.size()));
        rec.next_candidates = alloc::build_candidates(config, world, empty, first).features;
      }
    }
    result.upper_return += rec.upper_return();
    result.lower_return += rec.path_sum;
    ++result.interactions;
    if (hooks.on_interaction) hooks.on_interaction(rec);
    if (rec.done) break;
    // No active evader left but no winner yet: hold the allocation until timeout.
    if (alloc::active_evaders(world).empty()) {
      std::vector<PursuerAction> idle(static_cast<std::size_t>(n_p));
      while (!outcome.done()) {
        arena.step(world, idle);
        outcome = arena.check_termination(world);
        if (hooks.trajectory) hooks.trajectory->write(world);
      }
      break;
    }
  }
  result.outcome = outcome;
  result.steps = world.t;
  result.decision_seconds = seconds;
  return result;
}

}  // namespace swarm::train
