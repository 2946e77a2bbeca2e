#include "strew/config.hpp"

#include <cstdlib>
#include <fstream>

#include "strew/serde.hpp"

namespace strew {

namespace {

void apply_env(const char* name, std::string& out) {
  if (const char* v = std::getenv(name)) out = v;
}

void apply_env(const char* name, double& out) {
  if (const char* v = std::getenv(name)) out = std::stod(v);
}

void apply_env(const char* name, int& out) {
  if (const char* v = std::getenv(name)) out = std::stoi(v);
}

void apply_env(const char* name, uint64_t& out) {
  if (const char* v = std::getenv(name)) out = std::stoull(v);
}

void read_grpo(const json& j, GrpoConfig& cfg) {
  cfg.group_size = j.value("group_size", cfg.group_size);
  cfg.clip_epsilon = j.value("clip_epsilon", cfg.clip_epsilon);
  cfg.kl_coefficient = j.value("kl_coefficient", cfg.kl_coefficient);
  cfg.epsilon_sigma = j.value("epsilon_sigma", cfg.epsilon_sigma);
  cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
  cfg.seed = j.value("seed", cfg.seed);
}

void read_env_cfg(const json& j, ToyEnvConfig& env) {
  env.start_bins = j.value("start_bins", env.start_bins);
  env.length_bins = j.value("length_bins", env.length_bins);
  env.feature_dim = j.value("feature_dim", env.feature_dim);
  env.n_archetypes = j.value("n_archetypes", env.n_archetypes);
  env.temperature = j.value("temperature", env.temperature);
  env.jitter = j.value("jitter", env.jitter);
  env.signal_scale_in = j.value("signal_scale_in", env.signal_scale_in);
  env.signal_scale_shift = j.value("signal_scale_shift", env.signal_scale_shift);
  env.signal_noise = j.value("signal_noise", env.signal_noise);
  env.distractor_noise = j.value("distractor_noise", env.distractor_noise);
  env.distractor_noise_shift = j.value("distractor_noise_shift", env.distractor_noise_shift);
  env.shift_offset_start = j.value("shift_offset_start", env.shift_offset_start);
  env.shift_offset_length = j.value("shift_offset_length", env.shift_offset_length);
  env.n_options = j.value("n_options", env.n_options);
}

}  // namespace

AppConfig load_config(const std::optional<std::string>& path) {
  AppConfig cfg;
  if (path) {
    std::ifstream in(*path);
    if (!in) throw IoError("cannot open config " + *path);
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw SchemaError(std::string("config file: ") + e.what());
    }
    if (j.contains("judge")) {
      const json& jj = j["judge"];
      cfg.judge.type = jj.value("type", cfg.judge.type);
      cfg.judge.remote.base_url = jj.value("url", cfg.judge.remote.base_url);
      cfg.judge.remote.path = jj.value("path", cfg.judge.remote.path);
      cfg.judge.remote.model = jj.value("model", cfg.judge.remote.model);
      cfg.judge.remote.max_retries = jj.value("max_retries", cfg.judge.remote.max_retries);
      cfg.judge.remote.timeout_ms = jj.value("timeout_ms", cfg.judge.remote.timeout_ms);
      cfg.judge.remote.backoff_base_ms =
          jj.value("backoff_base_ms", cfg.judge.remote.backoff_base_ms);
      cfg.judge.remote.max_concurrent =
          jj.value("max_concurrent", cfg.judge.remote.max_concurrent);
    }
    if (j.contains("grpo")) read_grpo(j["grpo"], cfg.grpo);
    if (j.contains("clue")) {
      const json& jc = j["clue"];
      cfg.clue.delta_res = jc.value("delta_res", cfg.clue.delta_res);
      cfg.clue.delta_fps = jc.value("delta_fps", cfg.clue.delta_fps);
      cfg.clue.padding = jc.value("padding", cfg.clue.padding);
      cfg.clue.pixel_budget = jc.value("pixel_budget", cfg.clue.pixel_budget);
      cfg.clue.n_options = jc.value("n_options", cfg.clue.n_options);
    }
    if (j.contains("toy")) {
      const json& jt = j["toy"];
      cfg.toy.steps = jt.value("steps", cfg.toy.steps);
      cfg.toy.batch_groups = jt.value("batch_groups", cfg.toy.batch_groups);
      cfg.toy.n_train = jt.value("n_train", cfg.toy.n_train);
      cfg.toy.n_eval = jt.value("n_eval", cfg.toy.n_eval);
      cfg.toy.eval_every = jt.value("eval_every", cfg.toy.eval_every);
      cfg.toy.sft_learning_rate = jt.value("sft_learning_rate", cfg.toy.sft_learning_rate);
      cfg.toy.requires_think = jt.value("requires_think", cfg.toy.requires_think);
      if (jt.contains("env")) read_env_cfg(jt["env"], cfg.toy.env);
      if (jt.contains("kind"))
        cfg.toy.kind = task_kind_from_string(jt["kind"].get<std::string>());
    }
  }

  apply_env("STREW_JUDGE_TYPE", cfg.judge.type);
  apply_env("STREW_JUDGE_URL", cfg.judge.remote.base_url);
  apply_env("STREW_JUDGE_MODEL", cfg.judge.remote.model);
  apply_env("STREW_JUDGE_MAX_CONCURRENT", cfg.judge.remote.max_concurrent);
  apply_env("STREW_JUDGE_TIMEOUT_MS", cfg.judge.remote.timeout_ms);
  apply_env("STREW_GROUP_SIZE", cfg.grpo.group_size);
  apply_env("STREW_CLIP_EPSILON", cfg.grpo.clip_epsilon);
  apply_env("STREW_KL_COEF", cfg.grpo.kl_coefficient);
  apply_env("STREW_EPSILON_SIGMA", cfg.grpo.epsilon_sigma);
  apply_env("STREW_LEARNING_RATE", cfg.grpo.learning_rate);
  apply_env("STREW_SEED", cfg.grpo.seed);
  apply_env("STREW_CLUE_PADDING", cfg.clue.padding);
  apply_env("STREW_CLUE_DELTA_RES", cfg.clue.delta_res);
  apply_env("STREW_CLUE_DELTA_FPS", cfg.clue.delta_fps);
  apply_env("STREW_CLUE_BUDGET", cfg.clue.pixel_budget);

  cfg.toy.grpo = cfg.grpo;
  if (cfg.judge.type != "oracle" && cfg.judge.type != "http")
    throw SchemaError("judge.type must be 'oracle' or 'http'");
  return cfg;
}

std::unique_ptr<Judge> make_judge(const JudgeSelection& selection) {
  if (selection.type == "http") return std::make_unique<RemoteJudge>(selection.remote);
  return std::make_unique<OracleJudge>();
}

}  // namespace strew
