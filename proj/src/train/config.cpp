#include "swarm/train/config.hpp"

#include <cstdio>
#include <fstream>
#include <regex>
#include <set>

#include "swarm/core/error.hpp"

namespace swarm::train {

using nlohmann::json;

namespace {

// Reads known keys from one JSON object and rejects everything else.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw Error(ErrorKind::Config, path_ + " must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    if (!j_.contains(key)) return;
    used_.insert(key);
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw Error(ErrorKind::Config, path_ + "." + key + ": " + e.what());
    }
  }

  void get_vec2(const char* key, Vec2& out) {
    std::vector<double> v;
    get(key, v);
    if (!j_.contains(key)) return;
    if (v.size() != 2) throw Error(ErrorKind::Config, path_ + "." + key + " must be [x, y]");
    out = {v[0], v[1]};
  }

  const json* sub(const char* key) {
    if (!j_.contains(key)) return nullptr;
    used_.insert(key);
    return &j_.at(key);
  }

  std::string child(const char* key) const { return path_ + "." + key; }

  void finish() const {
    for (const auto& item : j_.items())
      if (!used_.count(item.key()))
        throw Error(ErrorKind::Config, "unknown key " + path_ + "." + item.key());
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

void read_arena(const json& j, ArenaConfig& a) {
  Section s(j, "arena");
  s.get("length", a.length);
  s.get("width", a.width);
  s.get("start_separation", a.start_separation);
  s.get("n_pursuers", a.n_pursuers);
  s.get("n_evaders", a.n_evaders);
  s.get("n_obstacles", a.n_obstacles);
  s.get("dt", a.dt);
  s.get("episode_len", a.episode_len);
  s.get("capture_radii", a.capture_radii);
  s.get("pursuer_vmax", a.pursuer_vmax);
  s.get("evader_vmax", a.evader_vmax);
  s.get("agent_radius", a.agent_radius);
  s.get("obstacle_radius", a.obstacle_radius);
  s.get("obstacle_speed_min", a.obstacle_speed_min);
  s.get("obstacle_speed_max", a.obstacle_speed_max);
  s.get("obstacle_redirect_interval", a.obstacle_redirect_interval);
  s.get_vec2("target", a.target);
  s.get("target_reach_radius", a.target_reach_radius);
  s.get("seed", a.seed);
  s.finish();
}

void read_dqn(const json& j, const std::string& path, alloc::DqnConfig& c) {
  Section s(j, path);
  s.get("lr", c.lr);
  s.get("gamma", c.gamma);
  s.get("zeta", c.zeta);
  s.get("batch", c.batch);
  s.get("capacity", c.capacity);
  s.get("hidden", c.hidden);
  s.finish();
}

void read_maddpg(const json& j, const std::string& path, plan::MaddpgConfig& c) {
  Section s(j, path);
  s.get("lr", c.lr);
  s.get("gamma", c.gamma);
  s.get("zeta", c.zeta);
  s.get("batch", c.batch);
  s.get("capacity", c.capacity);
  s.get("hidden", c.hidden);
  s.get("reward_scale", c.reward_scale);
  s.get("logit_reg", c.logit_reg);
  s.finish();
}

void read_model(const json& j, const std::string& path, ensemble::EnsembleConfig& c) {
  Section s(j, path);
  s.get("members", c.members);
  s.get("hidden", c.hidden);
  s.get("lr", c.lr);
  s.get("batch", c.batch);
  s.get("capacity", c.capacity);
  s.finish();
}

void read_reward(const json& j, const std::string& path, plan::RewardConstants& r) {
  Section s(j, path);
  s.get("capture_bonus", r.capture_bonus);
  s.get("obstacle_penalty", r.obstacle_penalty);
  s.get("neighbor_penalty", r.neighbor_penalty);
  s.get("threat_distance", r.threat_distance);
  s.get("omega2", r.omega2);
  s.finish();
}

void read_train(const json& j, TrainConfig& t) {
  Section s(j, "train");
  s.get("pretrain_upper_episodes", t.pretrain_upper_episodes);
  s.get("pretrain_lower_episodes", t.pretrain_lower_episodes);
  s.get("cross_episodes", t.cross_episodes);
  s.get("instance_pool", t.instance_pool);
  s.get("seed", t.seed);
  if (const json* u = s.sub("upper")) read_dqn(*u, s.child("upper"), t.upper);
  if (const json* l = s.sub("lower")) read_maddpg(*l, s.child("lower"), t.lower);
  if (const json* m = s.sub("model")) read_model(*m, s.child("model"), t.model);
  if (const json* r = s.sub("reward")) read_reward(*r, s.child("reward"), t.reward);
  s.get("omega1", t.omega1);
  s.get("eps_start", t.eps_start);
  s.get("eps_end", t.eps_end);
  s.get("cross_eps", t.cross_eps);
  s.get("noise_start", t.noise_start);
  s.get("noise_end", t.noise_end);
  s.get("pretrain_upper_scale", t.pretrain_upper_scale);
  s.get("cross_upper_scale", t.cross_upper_scale);
  s.get("lower_update_every", t.lower_update_every);
  s.get("upper_updates_per_round", t.upper_updates_per_round);
  s.get("model_updates_per_round", t.model_updates_per_round);
  s.get("fixed_h", t.fixed_h);
  s.get("disable_imve", t.disable_imve);
  s.get("skip_upper_pretrain", t.skip_upper_pretrain);
  s.get("skip_lower_pretrain", t.skip_lower_pretrain);
  s.finish();
}

void read_interaction(const json& j, interaction::InteractionParams& p) {
  Section s(j, "interaction");
  s.get("omega3", p.omega3);
  s.get("omega4", p.omega4);
  s.get("omega5", p.omega5);
  s.get("h_base", p.h_base);
  s.get("h_min", p.h_min);
  s.get("h_max", p.h_max);
  s.get("n_base", p.n_base);
  s.get("n_max", p.n_max);
  s.get("w_base", p.w_base);
  s.get("w_min", p.w_min);
  s.finish();
}

void read_eval(const json& j, EvalConfig& e) {
  Section s(j, "eval");
  s.get("instances", e.instances);
  s.get("seed", e.seed);
  s.finish();
}

}  // namespace

ArenaConfig scenario_preset(const std::string& name) {
  static const std::regex pattern(R"(V(\d+)(?:-O(\d+))?)");
  std::smatch m;
  if (!std::regex_match(name, m, pattern))
    throw Error(ErrorKind::Config, "unknown scenario '" + name + "' (expected V<n> or V<n>-O<k>)");
  const int n = std::stoi(m[1].str());
  if (n < 1 || n > 200) throw Error(ErrorKind::Config, "scenario size out of range: " + name);
  ArenaConfig a;
  a.n_pursuers = n;
  a.n_evaders = n;
  a.n_obstacles = m[2].matched ? std::stoi(m[2].str()) : (n <= 3 ? 2 : 4);
  return a;
}

void ExperimentConfig::validate() const {
  arena.validate();
  interaction.validate();
  const TrainConfig& t = train;
  if (t.pretrain_upper_episodes < 0 || t.pretrain_lower_episodes < 0 || t.cross_episodes < 0)
    throw Error(ErrorKind::Config, "episode counts must be non-negative");
  if (t.instance_pool < 1) throw Error(ErrorKind::Config, "instance_pool must be positive");
  if (t.fixed_h != 0 && (t.fixed_h < interaction.h_min || t.fixed_h > interaction.h_max))
    throw Error(ErrorKind::Config, "fixed_h must lie in [h_min, h_max]");
  if (t.upper.batch == 0 || t.lower.batch == 0 || t.model.batch == 0)
    throw Error(ErrorKind::Config, "batch sizes must be positive");
  if (t.upper.capacity == 0 || t.lower.capacity == 0 || t.model.capacity == 0)
    throw Error(ErrorKind::Config, "buffer capacities must be positive");
  if (t.model.members < 2) throw Error(ErrorKind::Config, "model.members must be at least 2");
  if (t.lower_update_every < 1) throw Error(ErrorKind::Config, "lower_update_every must be >= 1");
  if (t.omega1 < 0.0 || t.omega1 > 1.0) throw Error(ErrorKind::Config, "omega1 must lie in [0, 1]");
  if (eval.instances < 1) throw Error(ErrorKind::Config, "eval.instances must be positive");
}

ExperimentConfig default_config(const std::string& scenario) {
  ExperimentConfig c;
  c.scenario = scenario;
  c.arena = scenario_preset(scenario);
  return c;
}

ExperimentConfig parse_config(const json& j) {
  Section top(j, "config");
  int version = 0;
  top.get("version", version);
  if (version != kConfigVersion)
    throw Error(ErrorKind::Config,
                "config version must be " + std::to_string(kConfigVersion) + ", got " +
                    std::to_string(version));
  std::string scenario = "V3";
  top.get("scenario", scenario);
  ExperimentConfig c = default_config(scenario);
  if (const json* a = top.sub("arena")) read_arena(*a, c.arena);
  if (const json* t = top.sub("train")) read_train(*t, c.train);
  if (const json* i = top.sub("interaction")) read_interaction(*i, c.interaction);
  if (const json* e = top.sub("eval")) read_eval(*e, c.eval);
  top.finish();
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "cannot open config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Config, path + ": " + e.what());
  }
  return parse_config(j);
}

json to_json(const ExperimentConfig& c) {
  const ArenaConfig& a = c.arena;
  const TrainConfig& t = c.train;
  const auto& p = c.interaction;
  json j;
  j["version"] = kConfigVersion;
  j["scenario"] = c.scenario;
  j["arena"] = {{"length", a.length},
                {"width", a.width},
                {"start_separation", a.start_separation},
                {"n_pursuers", a.n_pursuers},
                {"n_evaders", a.n_evaders},
                {"n_obstacles", a.n_obstacles},
                {"dt", a.dt},
                {"episode_len", a.episode_len},
                {"capture_radii", a.capture_radii},
                {"pursuer_vmax", a.pursuer_vmax},
                {"evader_vmax", a.evader_vmax},
                {"agent_radius", a.agent_radius},
                {"obstacle_radius", a.obstacle_radius},
                {"obstacle_speed_min", a.obstacle_speed_min},
                {"obstacle_speed_max", a.obstacle_speed_max},
                {"obstacle_redirect_interval", a.obstacle_redirect_interval},
                {"target", {a.target.x, a.target.y}},
                {"target_reach_radius", a.target_reach_radius},
                {"seed", a.seed}};
  j["train"] = {
      {"pretrain_upper_episodes", t.pretrain_upper_episodes},
      {"pretrain_lower_episodes", t.pretrain_lower_episodes},
      {"cross_episodes", t.cross_episodes},
      {"instance_pool", t.instance_pool},
      {"seed", t.seed},
      {"upper",
       {{"lr", t.upper.lr}, {"gamma", t.upper.gamma}, {"zeta", t.upper.zeta},
        {"batch", t.upper.batch}, {"capacity", t.upper.capacity}, {"hidden", t.upper.hidden}}},
      {"lower",
       {{"lr", t.lower.lr}, {"gamma", t.lower.gamma}, {"zeta", t.lower.zeta},
        {"batch", t.lower.batch}, {"capacity", t.lower.capacity}, {"hidden", t.lower.hidden},
        {"reward_scale", t.lower.reward_scale},
        {"logit_reg", t.lower.logit_reg}}},
      {"model",
       {{"members", t.model.members}, {"hidden", t.model.hidden}, {"lr", t.model.lr},
        {"batch", t.model.batch}, {"capacity", t.model.capacity}}},
      {"reward",
       {{"capture_bonus", t.reward.capture_bonus}, {"obstacle_penalty", t.reward.obstacle_penalty},
        {"neighbor_penalty", t.reward.neighbor_penalty},
        {"threat_distance", t.reward.threat_distance}, {"omega2", t.reward.omega2}}},
      {"omega1", t.omega1},
      {"eps_start", t.eps_start},
      {"eps_end", t.eps_end},
      {"cross_eps", t.cross_eps},
      {"noise_start", t.noise_start},
      {"noise_end", t.noise_end},
      {"pretrain_upper_scale", t.pretrain_upper_scale},
      {"cross_upper_scale", t.cross_upper_scale},
      {"lower_update_every", t.lower_update_every},
      {"upper_updates_per_round", t.upper_updates_per_round},
      {"model_updates_per_round", t.model_updates_per_round},
      {"fixed_h", t.fixed_h},
      {"disable_imve", t.disable_imve},
      {"skip_upper_pretrain", t.skip_upper_pretrain},
      {"skip_lower_pretrain", t.skip_lower_pretrain}};
  j["interaction"] = {{"omega3", p.omega3}, {"omega4", p.omega4}, {"omega5", p.omega5},
                      {"h_base", p.h_base}, {"h_min", p.h_min},   {"h_max", p.h_max},
                      {"n_base", p.n_base}, {"n_max", p.n_max},   {"w_base", p.w_base},
                      {"w_min", p.w_min}};
  j["eval"] = {{"instances", c.eval.instances}, {"seed", c.eval.seed}};
  return j;
}

std::string config_hash(const ExperimentConfig& c) {
  const std::string text = to_json(c).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace swarm::train
