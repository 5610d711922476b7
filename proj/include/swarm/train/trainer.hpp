#pragma once

#include <string>
#include <vector>

#include "swarm/train/config.hpp"
#include "swarm/train/episode.hpp"

namespace swarm::train {

enum class Phase { PretrainUpper = 0, PretrainLower = 1, Cross = 2 };
const char* to_string(Phase p);
Phase phase_from_string(const std::string& s);

struct TrainLogRow {
  Phase phase = Phase::PretrainUpper;
  int episode = 0;
  double upper_return = 0.0;
  double lower_return = 0.0;
  bool win = false;
  int captured = 0;
  int reached = 0;
  int steps = 0;
};

struct HTraceRow {
  int episode = 0;
  int t = 0;
  double v_hat = 0.0;
  int h = 0;
  int span = 0;
  int n = 1;
  double mean_weight = 1.0;
};

struct TimingRow {
  Phase phase = Phase::PretrainUpper;
  int episode = 0;
  double seconds = 0.0;
};

/// Instance `k` of the training pool is generated from derive_seed(seed, k).
std::vector<WorldState> make_pool(const Arena& arena, std::uint64_t seed, int count);

/// Owns both layers, the ensemble and all training state. Every phase can be
/// stopped after any episode, saved and resumed.
class Trainer {
 public:
  explicit Trainer(ExperimentConfig config);

  const ExperimentConfig& config() const { return config_; }
  const Arena& arena() const { return arena_; }
  const std::vector<WorldState>& pool() const { return pool_; }
  alloc::AllocationLearner& upper() { return upper_; }
  plan::MaddpgLearner& lower() { return lower_; }
  ensemble::Ensemble& model() { return model_; }
  const alloc::AllocationLearner& upper() const { return upper_; }
  const plan::MaddpgLearner& lower() const { return lower_; }
  const ensemble::Ensemble& model() const { return model_; }

  /// Episodes completed per phase.
  int progress(Phase p) const { return progress_[static_cast<int>(p)]; }
  int planned(Phase p) const;

  double epsilon(int episode) const;
  double noise(int episode) const;

  TrainLogRow pretrain_upper_episode();
  TrainLogRow pretrain_lower_episode();
  TrainLogRow cross_episode(std::vector<HTraceRow>* trace = nullptr);

  /// Runs the remaining episodes of a phase. Skip switches leave the phase
  /// empty. Rows are appended to the given sinks.
  void run_phase(Phase p, std::vector<TrainLogRow>& log, std::vector<HTraceRow>* trace = nullptr,
                 std::vector<TimingRow>* timing = nullptr);

  void save(const std::string& path) const;
  /// Restores a checkpoint written by save(). Throws IncompatibleEncoding
  /// when the checkpoint was made for another swarm size.
  void load(const std::string& path);

 private:
  int greedy_column(const alloc::CandidateSet& set) const;
  /// Allocation used before the upper layer is trusted: the pre-trained
  /// network greedily, or max single-pursuer capture probability when
  /// upper pre-training is skipped.
  int fallback_choice(const alloc::CandidateSet& set) const;
  StepPlan plan_step(const nn::Vector& summary) const;
  void learn_interaction(InteractionRecord& rec, int episode, std::vector<HTraceRow>* trace);
  EpisodeHooks planner_hooks(double noise);

  ExperimentConfig config_;
  Arena arena_;
  std::vector<WorldState> pool_;
  alloc::AllocationLearner upper_;
  plan::MaddpgLearner lower_;
  ensemble::Ensemble model_;
  Rng explore_;
  int progress_[3] = {0, 0, 0};
  int lower_steps_ = 0;
};

}  // namespace swarm::train
