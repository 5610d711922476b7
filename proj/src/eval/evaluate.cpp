#include "swarm/eval/evaluate.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include "json.hpp"
#include "swarm/core/error.hpp"
#include "swarm/train/logs.hpp"

namespace swarm::eval {

int actor_source(int pursuer, int trained_pursuers, int ability_classes) {
  if (ability_classes <= 0) return std::min(pursuer, trained_pursuers - 1);
  const int cls = pursuer % ability_classes;
  int best = -1;
  int best_gap = 0;
  for (int k = 0; k < trained_pursuers; ++k) {
    const int gap = std::abs(k % ability_classes - cls);
    if (best < 0 || gap < best_gap) {
      best = k;
      best_gap = gap;
    }
  }
  return best;
}

Deployment deploy(const train::Trainer& trained, const ArenaConfig& target, AllocationPolicy policy) {
  const train::ExperimentConfig& c = trained.config();
  Deployment d;
  d.upper = &trained.upper();
  d.model = &trained.model();
  d.params = c.interaction;
  d.fixed_h = c.train.fixed_h;
  d.policy = policy;
  d.omega1 = c.train.omega1;
  d.reward = c.train.reward;
  const int trained_n = trained.lower().agents();
  const int classes = static_cast<int>(target.capture_radii.size());
  for (int i = 0; i < target.n_pursuers; ++i) {
    const int src = target.n_pursuers == trained_n ? i : actor_source(i, trained_n, classes);
    d.actors.push_back(&trained.lower().actor(src));
  }
  return d;
}

std::uint64_t eval_instance_seed(std::uint64_t seed, int k) {
  return derive_seed(seed, static_cast<std::uint64_t>(k));
}

train::EpisodeResult run_deployed(const Arena& arena, const WorldState& start, const Deployment& d,
                                  std::uint64_t instance_seed, TrajectoryWriter* trajectory) {
  if (d.actors.size() != start.pursuers.size())
    throw Error(ErrorKind::IncompatibleEncoding, "deployment has " +
                                                     std::to_string(d.actors.size()) +
                                                     " actors for " +
                                                     std::to_string(start.pursuers.size()) +
                                                     " pursuers");
  Rng random(derive_seed(instance_seed, 77));
  Rng unused(0);
  const double vmax = arena.config().pursuer_vmax;
  auto greedy = [&d](const alloc::CandidateSet& set, int) {
    const nn::Vector q = d.upper->q_values(set.features);
    int best = 0;
    for (int k = 1; k < q.size(); ++k)
      if (q[k] > q[best]) best = k;
    return best;
  };
  auto uniform = [&random](const alloc::CandidateSet& set, int) {
    return static_cast<int>(random.index(static_cast<std::size_t>(set.size())));
  };
  train::EpisodeHooks hooks;
  if (d.policy == AllocationPolicy::Random) {
    hooks.allocate = uniform;
    hooks.reassign = uniform;
  } else {
    hooks.allocate = greedy;
    hooks.reassign = greedy;
  }
  hooks.act = [&](int i, const nn::Vector& obs) {
    return plan::actor_act(*d.actors[static_cast<std::size_t>(i)], obs, 0.0, unused, vmax);
  };
  hooks.plan_step = [&d](const nn::Vector& s) {
    train::StepPlan sp;
    sp.v_hat = d.model->uncertainty(s);
    sp.h = d.fixed_h > 0 ? d.fixed_h : interaction::adaptive_H(sp.v_hat, d.params);
    sp.n = interaction::adaptive_N(sp.v_hat, d.params);
    return sp;
  };
  hooks.trajectory = trajectory;
  return train::run_episode(arena, start, d.omega1, d.reward, hooks);
}

double EvalReport::mean_return() const {
  if (rows.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : rows) s += r.upper_return;
  return s / static_cast<double>(rows.size());
}

double EvalReport::mean_decision_ms() const {
  if (rows.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : rows) s += r.decision_ms;
  return s / static_cast<double>(rows.size());
}

double EvalReport::win_rate() const {
  if (rows.empty()) return 0.0;
  int wins = 0;
  for (const auto& r : rows) wins += r.win ? 1 : 0;
  return 100.0 * wins / static_cast<double>(rows.size());
}

EvalReport evaluate(const Arena& arena, const Deployment& d, std::uint64_t seed, int instances,
                    const std::string& label) {
  EvalReport report;
  report.label = label;
  report.rows.resize(static_cast<std::size_t>(instances));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&]() {
    for (int k = next++; k < instances; k = next++) {
      try {
        const std::uint64_t s = eval_instance_seed(seed, k);
        const WorldState start = arena.generate_instance(s);
        const train::EpisodeResult r = run_deployed(arena, start, d, s);
        EvalRow& row = report.rows[static_cast<std::size_t>(k)];
        row.instance = k;
        row.seed = s;
        row.upper_return = r.upper_return;
        row.win = r.win();
        row.captured = r.outcome.captured_count;
        row.reached = r.outcome.reached_count;
        row.steps = r.steps;
        row.decision_ms = 1e3 * r.decision_seconds;
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int threads = std::max(1, std::min<int>(instances, static_cast<int>(std::thread::hardware_concurrency())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return report;
}

void write_report(const EvalReport& report, const std::string& dir) {
  std::filesystem::create_directories(dir);
  using train::format_double;
  {
    std::ofstream out(dir + "/eval_report.csv", std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + dir + "/eval_report.csv");
    out << "instance,seed,return,win,captured,reached,steps\n";
    for (const auto& r : report.rows)
      out << r.instance << ',' << r.seed << ',' << format_double(r.upper_return) << ','
          << (r.win ? 1 : 0) << ',' << r.captured << ',' << r.reached << ',' << r.steps << '\n';
  }
  {
    nlohmann::json j;
    j["label"] = report.label;
    j["instances"] = report.rows.size();
    j["mean_return"] = report.mean_return();
    j["win_rate"] = report.win_rate();
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : report.rows)
      rows.push_back({{"instance", r.instance}, {"seed", r.seed}, {"return", r.upper_return},
                      {"win", r.win}, {"captured", r.captured}, {"reached", r.reached},
                      {"steps", r.steps}});
    j["rows"] = rows;
    std::ofstream out(dir + "/eval_report.json", std::ios::binary | std::ios::trunc);
    out << j.dump(2) << '\n';
  }
  {
    std::ofstream out(dir + "/decision_time.csv", std::ios::binary | std::ios::trunc);
    out << "instance,decision_ms\n";
    for (const auto& r : report.rows) out << r.instance << ',' << format_double(r.decision_ms) << '\n';
  }
}

}  // namespace swarm::eval
