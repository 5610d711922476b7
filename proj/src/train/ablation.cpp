#include "swarm/train/ablation.hpp"

#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>

#include <unistd.h>

#include "swarm/core/error.hpp"
#include "swarm/train/logs.hpp"

namespace swarm::train {

std::vector<Variant> itm_variants() {
  return {{"ITM", false, false, 0},
          {"ITM/UL", true, false, 0},
          {"ITM/LL", false, true, 0},
          {"ITM/UL&LL", true, true, 0}};
}

std::vector<Variant> fixed_h_variants() {
  return {{"adaptive", false, false, 0},
          {"H=13", false, false, 13},
          {"H=16", false, false, 16},
          {"H=19", false, false, 19}};
}

ExperimentConfig apply_variant(ExperimentConfig config, const Variant& v) {
  config.train.skip_upper_pretrain = config.train.skip_upper_pretrain || v.skip_upper;
  config.train.skip_lower_pretrain = config.train.skip_lower_pretrain || v.skip_lower;
  if (v.fixed_h > 0) config.train.fixed_h = v.fixed_h;
  config.validate();
  return config;
}

std::string variant_dir(const std::string& label) {
  std::string out;
  for (char c : label) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '-') {
      out += c;
    } else if (c == '=') {
      out += '-';
    } else if (out.empty() || out.back() != '_') {
      out += '_';
    }
  }
  return out;
}

std::vector<VariantResult> run_ablation_suite(const ExperimentConfig& config,
                                              const std::vector<Variant>& variants,
                                              const std::string& out_dir) {
  // Pre-training ignores fixed_h and the IMVE switch, so variants with the
  // same skip switches start cross-training from the same state.
  struct Pretrained {
    std::string checkpoint;
    std::vector<TrainLogRow> log;
  };
  std::map<std::pair<bool, bool>, Pretrained> shared;
  const std::string scratch =
      (std::filesystem::temp_directory_path() /
       ("swarm_ablation_" + config_hash(config) + "_" + std::to_string(::getpid())))
          .string();

  std::vector<VariantResult> results;
  for (const Variant& v : variants) {
    VariantResult r;
    r.variant = v;
    const ExperimentConfig vc = apply_variant(config, v);
    Trainer trainer(vc);
    const auto key = std::make_pair(vc.train.skip_upper_pretrain, vc.train.skip_lower_pretrain);
    auto hit = shared.find(key);
    if (hit != shared.end()) {
      trainer.load(hit->second.checkpoint);
      r.log = hit->second.log;
    } else {
      trainer.run_phase(Phase::PretrainUpper, r.log);
      trainer.run_phase(Phase::PretrainLower, r.log);
      std::filesystem::create_directories(scratch);
      Pretrained p{scratch + "/" + std::to_string(shared.size()) + ".ckpt", r.log};
      trainer.save(p.checkpoint);
      shared.emplace(key, std::move(p));
    }
    trainer.run_phase(Phase::Cross, r.log, &r.trace);
    if (!out_dir.empty()) {
      const std::string dir = out_dir + "/" + variant_dir(v.label);
      std::filesystem::create_directories(dir);
      std::filesystem::remove(dir + "/train_log.csv");
      write_train_log(dir + "/train_log.csv", r.log);
      write_h_trace(dir + "/h_trace.csv", r.trace);
    }
    results.push_back(std::move(r));
  }
  std::error_code ignored;
  std::filesystem::remove_all(scratch, ignored);
  if (!out_dir.empty()) {
    std::ofstream out(out_dir + "/ablation_curves.csv", std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + out_dir + "/ablation_curves.csv");
    out << "variant,episode,upper_return,lower_return,win,mean_h\n";
    for (const VariantResult& r : results) {
      for (const TrainLogRow& row : r.log) {
        if (row.phase != Phase::Cross) continue;
        double h_sum = 0.0;
        int h_count = 0;
        for (const HTraceRow& h : r.trace)
          if (h.episode == row.episode) {
            h_sum += h.h;
            ++h_count;
          }
        out << r.variant.label << ',' << row.episode << ',' << format_double(row.upper_return)
            << ',' << format_double(row.lower_return) << ',' << (row.win ? 1 : 0) << ','
            << format_double(h_count > 0 ? h_sum / h_count : 0.0) << '\n';
      }
    }
  }
  return results;
}

}  // namespace swarm::train
