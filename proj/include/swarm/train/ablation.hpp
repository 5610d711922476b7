#pragma once

#include <string>
#include <vector>

#include "swarm/train/trainer.hpp"

namespace swarm::train {

struct Variant {
  std::string label;  // "ITM", "ITM/UL", "ITM/LL", "ITM/UL&LL", "H=13", ...
  bool skip_upper = false;
  bool skip_lower = false;
  int fixed_h = 0;
};

/// ITM with and without each pre-training stage.
std::vector<Variant> itm_variants();
/// Adaptive H against the fixed grid {13, 16, 19}.
std::vector<Variant> fixed_h_variants();

ExperimentConfig apply_variant(ExperimentConfig config, const Variant& v);

/// Directory-safe form of a label ("ITM/UL&LL" -> "ITM_UL_LL").
std::string variant_dir(const std::string& label);

struct VariantResult {
  Variant variant;
  std::vector<TrainLogRow> log;
  std::vector<HTraceRow> trace;
};

/// Runs every phase of every variant from the same seed. With a non-empty
/// `out_dir`, each variant gets <out_dir>/<variant_dir>/{train_log,h_trace}.csv
/// and the cross-training curves of all variants go to <out_dir>/ablation_curves.csv
/// (variant,episode,upper_return,lower_return,win,mean_h).
std::vector<VariantResult> run_ablation_suite(const ExperimentConfig& config,
                                              const std::vector<Variant>& variants,
                                              const std::string& out_dir);

}  // namespace swarm::train
