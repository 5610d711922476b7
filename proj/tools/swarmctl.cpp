// swarmctl: instance generation, training phases, evaluation and export.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "swarm/core/error.hpp"
#include "swarm/eval/evaluate.hpp"
#include "swarm/sim/trajectory.hpp"
#include "swarm/train/ablation.hpp"
#include "swarm/train/logs.hpp"

namespace fs = std::filesystem;
using namespace swarm;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "run";
  std::string scenario;
  int fixed_h = 0;
  bool no_imve = false;
  bool skip_upper = false;
  bool skip_lower = false;
  std::string ckpt;
  std::string baseline = "none";
  int instances = 0;
  int instance = 0;
  std::string suite = "all";
};

train::ExperimentConfig resolve(const Options& o, bool scenario_is_target) {
  train::ExperimentConfig c =
      o.config.empty() ? train::default_config(o.scenario.empty() ? "V3" : o.scenario)
                       : train::load_config(o.config);
  if (!o.config.empty() && !o.scenario.empty() && !scenario_is_target) {
    c.scenario = o.scenario;
    c.arena = train::scenario_preset(o.scenario);
  }
  if (o.fixed_h) c.train.fixed_h = o.fixed_h;
  if (o.no_imve) c.train.disable_imve = true;
  if (o.skip_upper) c.train.skip_upper_pretrain = true;
  if (o.skip_lower) c.train.skip_lower_pretrain = true;
  if (o.instances > 0) c.eval.instances = o.instances;
  c.validate();
  return c;
}

std::string ckpt_dir(const Options& o) { return o.out + "/checkpoints"; }

void save_phase(const train::Trainer& t, const Options& o, train::Phase phase, const std::string& name) {
  fs::create_directories(ckpt_dir(o));
  const std::string path = ckpt_dir(o) + "/" + name;
  t.save(path);
  train::write_manifest(ckpt_dir(o) + "/manifest.json", train::to_string(phase), t.progress(phase),
                        train::config_hash(t.config()), name);
}

/// Loads the newest checkpoint available among `names`, if any.
void resume_from(train::Trainer& t, const Options& o, std::initializer_list<const char*> names) {
  if (!o.ckpt.empty()) {
    t.load(o.ckpt);
    return;
  }
  for (const char* n : names) {
    const std::string p = ckpt_dir(o) + "/" + n;
    if (fs::exists(p)) {
      t.load(p);
      return;
    }
  }
}

int run_phase(const Options& o, train::Phase phase) {
  train::ExperimentConfig c = resolve(o, false);
  if (o.seed) c.train.seed = *o.seed;
  train::Trainer t(c);
  if (phase == train::Phase::PretrainLower) resume_from(t, o, {"upper.ckpt"});
  if (phase == train::Phase::Cross) resume_from(t, o, {"lower.ckpt", "upper.ckpt"});
  std::vector<train::TrainLogRow> log;
  std::vector<train::HTraceRow> trace;
  std::vector<train::TimingRow> timing;
  t.run_phase(phase, log, &trace, &timing);
  fs::create_directories(o.out);
  train::write_train_log(o.out + "/train_log.csv", log);
  train::write_timing(o.out + "/timing_" + train::to_string(phase) + ".csv", timing);
  if (phase == train::Phase::Cross) train::write_h_trace(o.out + "/h_trace.csv", trace);
  const char* name = phase == train::Phase::PretrainUpper   ? "upper.ckpt"
                     : phase == train::Phase::PretrainLower ? "lower.ckpt"
                                                            : "final.ckpt";
  save_phase(t, o, phase, name);
  std::printf("%s: %zu episodes, log %s/train_log.csv, checkpoint %s/%s\n", train::to_string(phase),
              log.size(), o.out.c_str(), ckpt_dir(o).c_str(), name);
  return 0;
}

std::string checkpoint_path(const Options& o) {
  return o.ckpt.empty() ? ckpt_dir(o) + "/final.ckpt" : o.ckpt;
}

void print_report(const eval::EvalReport& r) {
  std::printf("%s: instances=%zu Re.=%.3f Ti.=%.3f ms W.R.=%.1f%%\n", r.label.c_str(), r.rows.size(),
              r.mean_return(), r.mean_decision_ms(), r.win_rate());
}

int cmd_generate(const Options& o) {
  train::ExperimentConfig c = resolve(o, false);
  if (o.seed) c.train.seed = *o.seed;
  const Arena arena(c.arena);
  const auto pool = train::make_pool(arena, c.train.seed, c.train.instance_pool);
  fs::create_directories(o.out);
  std::ofstream out(o.out + "/instances.jsonl", std::ios::binary | std::ios::trunc);
  for (const WorldState& w : pool) out << trajectory_record(w).dump() << '\n';
  std::ofstream cfg(o.out + "/config.json", std::ios::binary | std::ios::trunc);
  cfg << train::to_json(c).dump(2) << '\n';
  std::printf("generated %zu instances in %s/instances.jsonl\n", pool.size(), o.out.c_str());
  return 0;
}

int cmd_evaluate(const Options& o) {
  train::ExperimentConfig c = resolve(o, false);
  if (o.seed) c.eval.seed = *o.seed;
  train::Trainer t(c);
  t.load(checkpoint_path(o));
  const Arena arena(c.arena);
  const bool random = o.baseline == "random";
  const eval::Deployment d =
      eval::deploy(t, c.arena, random ? eval::AllocationPolicy::Random : eval::AllocationPolicy::Trained);
  const eval::EvalReport r = eval::evaluate(arena, d, c.eval.seed, c.eval.instances,
                                            random ? "random-allocation" : "HRL");
  const std::string dir = random ? o.out + "/baseline" : o.out;
  eval::write_report(r, dir);
  print_report(r);
  return 0;
}

int cmd_generalize(const Options& o) {
  if (o.scenario.empty()) throw Error(ErrorKind::Config, "generalize needs --scenario");
  train::ExperimentConfig c = resolve(o, true);
  if (o.seed) c.eval.seed = *o.seed;
  train::Trainer t(c);
  t.load(checkpoint_path(o));
  ArenaConfig target = c.arena;
  const ArenaConfig preset = train::scenario_preset(o.scenario);
  target.n_pursuers = preset.n_pursuers;
  target.n_evaders = preset.n_evaders;
  target.n_obstacles = preset.n_obstacles;
  target.validate();
  const Arena arena(target);
  const eval::Deployment d = eval::deploy(t, target);
  const eval::EvalReport r = eval::evaluate(arena, d, c.eval.seed, c.eval.instances,
                                            c.scenario + "->" + o.scenario);
  eval::write_report(r, o.out);
  print_report(r);
  return 0;
}

int cmd_export(const Options& o) {
  train::ExperimentConfig c = resolve(o, false);
  if (o.seed) c.eval.seed = *o.seed;
  train::Trainer t(c);
  t.load(checkpoint_path(o));
  const Arena arena(c.arena);
  const std::uint64_t s = eval::eval_instance_seed(c.eval.seed, o.instance);
  const fs::path path(o.out);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  TrajectoryWriter writer(o.out);
  const train::EpisodeResult r = eval::run_deployed(arena, arena.generate_instance(s), eval::deploy(t, c.arena), s, &writer);
  std::printf("exported %d steps to %s (winner %s, %s)\n", r.steps, o.out.c_str(),
              to_string(r.outcome.winner), to_string(r.outcome.reason));
  return 0;
}

int cmd_ablate(const Options& o) {
  train::ExperimentConfig c = resolve(o, false);
  if (o.seed) c.train.seed = *o.seed;
  std::vector<train::Variant> variants;
  if (o.suite == "itm" || o.suite == "all")
    for (const auto& v : train::itm_variants()) variants.push_back(v);
  if (o.suite == "fixed-h" || o.suite == "all")
    for (const auto& v : train::fixed_h_variants())
      if (v.fixed_h > 0) variants.push_back(v);
  if (variants.empty()) throw Error(ErrorKind::Config, "unknown suite '" + o.suite + "'");
  fs::create_directories(o.out);
  const auto results = train::run_ablation_suite(c, variants, o.out);
  for (const auto& r : results) std::printf("%s: %zu log rows\n", r.variant.label.c_str(), r.log.size());
  std::printf("curves in %s/ablation_curves.csv\n", o.out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical pursuit-evasion training and evaluation"};
  app.require_subcommand(1);
  Options o;

  auto common = [&o](CLI::App* sub) {
    sub->add_option("--config", o.config, "Experiment config (JSON)");
    sub->add_option("--seed", o.seed, "Training seed (evaluation seed for evaluate/generalize/export)");
    sub->add_option("--out", o.out, "Output directory (file for export-trajectory)");
    sub->add_option("--scenario", o.scenario, "Scenario preset V<n>[-O<k>]");
    sub->add_option("--fixed-h", o.fixed_h, "Fix the interaction step H");
    sub->add_flag("--no-imve", o.no_imve, "Plain DQN updates in cross-training");
    sub->add_flag("--skip-upper-pretrain", o.skip_upper, "Skip upper pre-training");
    sub->add_flag("--skip-lower-pretrain", o.skip_lower, "Skip lower pre-training");
    sub->add_option("--ckpt", o.ckpt, "Checkpoint to load");
  };

  auto* gen = app.add_subcommand("generate", "Generate the training instance pool");
  auto* pu = app.add_subcommand("pretrain-upper", "Upper-layer pre-training");
  auto* pl = app.add_subcommand("pretrain-lower", "Lower-layer pre-training");
  auto* ct = app.add_subcommand("cross-train", "Cross-training with adaptive interaction");
  auto* ab = app.add_subcommand("ablate", "ITM and fixed-H ablation suites");
  auto* ev = app.add_subcommand("evaluate", "Evaluate a checkpoint");
  auto* ge = app.add_subcommand("generalize", "Deploy a checkpoint to another swarm size");
  auto* ex = app.add_subcommand("export-trajectory", "Write one evaluation episode as JSONL");
  for (auto* s : {gen, pu, pl, ct, ab, ev, ge, ex}) common(s);
  ev->add_option("--baseline", o.baseline, "Allocation policy: none (trained) or random")
      ->check(CLI::IsMember({"none", "random"}));
  for (auto* s : {ev, ge}) s->add_option("--instances", o.instances, "Number of evaluation instances");
  ex->add_option("--instance", o.instance, "Evaluation instance index");
  ab->add_option("--suite", o.suite, "itm, fixed-h or all")->check(CLI::IsMember({"itm", "fixed-h", "all"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_code(ErrorKind::Config);
  }

  try {
    if (*gen) return cmd_generate(o);
    if (*pu) return run_phase(o, train::Phase::PretrainUpper);
    if (*pl) return run_phase(o, train::Phase::PretrainLower);
    if (*ct) return run_phase(o, train::Phase::Cross);
    if (*ab) return cmd_ablate(o);
    if (*ev) return cmd_evaluate(o);
    if (*ge) return cmd_generalize(o);
    if (*ex) return cmd_export(o);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
