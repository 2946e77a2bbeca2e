#include <CLI11.hpp>

#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>

#include "strew/config.hpp"
#include "strew/dataset.hpp"
#include "strew/log.hpp"
#include "strew/metrics.hpp"
#include "strew/serde.hpp"
#include "strew/service.hpp"
#include "strew/toy.hpp"
#include "strew/version.hpp"

namespace {

using strew::json;

struct GlobalOpts {
  std::optional<std::string> config_path;
  std::optional<uint64_t> seed;
  std::string log_level = "warn";
};

strew::AppConfig resolve_config(const GlobalOpts& opts) {
  strew::AppConfig cfg = strew::load_config(opts.config_path);
  if (opts.seed) {
    cfg.grpo.seed = *opts.seed;
    cfg.toy.grpo.seed = *opts.seed;
  }
  return cfg;
}

void write_or_print(const json& j, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream out(out_path, std::ios::trunc);
  if (!out) throw strew::IoError("cannot write " + out_path);
  out << j.dump() << '\n';
}

int run_score(const GlobalOpts& opts, const std::string& request_path) {
  strew::AppConfig cfg = resolve_config(opts);
  std::ifstream in(request_path);
  if (!in) throw strew::IoError("cannot open " + request_path);
  json body;
  in >> body;
  strew::ScoreRequest request = strew::score_request_from_json(body);
  auto judge = strew::make_judge(cfg.judge);
  strew::ScoreResponse response = strew::handle_score(request, *judge, cfg.grpo);
  std::cout << strew::score_response_to_json(response).dump() << '\n';
  return 0;
}

int run_eval(const GlobalOpts& opts, const std::string& pred, const std::string& gt,
             const std::string& kind_name, const std::string& out_path) {
  strew::AppConfig cfg = resolve_config(opts);
  strew::TaskKind kind = strew::task_kind_from_string(kind_name);
  auto judge = strew::make_judge(cfg.judge);
  strew::MetricReport report = strew::evaluate_run(pred, gt, kind, judge.get());
  write_or_print(strew::metric_report_to_json(report), out_path);
  return 0;
}

int run_train_toy(const GlobalOpts& opts, const std::string& algo, int steps,
                  const std::string& out_path, const std::string& stats_path) {
  strew::AppConfig cfg = resolve_config(opts);
  strew::ToyTrainConfig train_cfg = cfg.toy;
  if (steps >= 0) train_cfg.steps = steps;

  strew::TrainReport report =
      algo == "sft" ? strew::train_sft(train_cfg) : strew::train_grpo(train_cfg);

  if (!stats_path.empty()) {
    std::ofstream stats(stats_path, std::ios::trunc);
    if (!stats) throw strew::IoError("cannot write " + stats_path);
    for (const auto& s : report.series)
      stats << json{{"step", s.step},
                    {"mean_reward", s.mean_reward},
                    {"mean_kl", s.mean_kl},
                    {"objective", s.objective}}
                   .dump()
            << '\n';
  }
  write_or_print(strew::train_report_to_json(report), out_path);
  return 0;
}

int run_gen_synth(const GlobalOpts& opts, const std::string& kind_name, int n,
                  const std::string& out_path, const std::string& mix_spec) {
  strew::AppConfig cfg = resolve_config(opts);
  uint64_t seed = cfg.grpo.seed;
  std::vector<strew::TaskInstance> instances;
  if (!mix_spec.empty()) {
    std::vector<strew::MixComponent> mix;
    if (mix_spec == "default") {
      mix = strew::default_corpus_mix();
    } else {
      // "<kind>:<ratio>,<kind>:<ratio>,..."
      std::string item;
      std::stringstream ss(mix_spec);
      while (std::getline(ss, item, ',')) {
        size_t colon = item.find(':');
        if (colon == std::string::npos)
          throw strew::SchemaError("mix entries must look like kind:ratio");
        mix.push_back({strew::task_kind_from_string(item.substr(0, colon)),
                       std::stod(item.substr(colon + 1))});
      }
    }
    instances = strew::synth_mix(seed, mix, n);
  } else {
    instances = strew::synth_mirror(seed, strew::task_kind_from_string(kind_name), n);
  }
  strew::write_task_file(instances, out_path);
  std::cout << "wrote " << instances.size() << " tasks to " << out_path << '\n';
  return 0;
}

int run_clue(const GlobalOpts& opts, const std::string& tasks_path,
             const std::string& kind_name, const std::string& client_kind,
             const std::string& script_path, const std::string& url,
             const std::string& out_path) {
  strew::AppConfig cfg = resolve_config(opts);
  strew::TaskKind kind = strew::task_kind_from_string(kind_name);
  auto tasks = strew::load_task_file(tasks_path, kind);

  std::unique_ptr<strew::ModelClient> client;
  if (client_kind == "mock") {
    if (script_path.empty()) throw strew::Error("clue-run: --script required for mock client");
    client = strew::ScriptedModelClient::from_file(script_path);
  } else if (client_kind == "http") {
    if (url.empty()) throw strew::Error("clue-run: --url required for http client");
    client = std::make_unique<strew::HttpModelClient>(url);
  } else {
    throw strew::Error("clue-run: unknown client '" + client_kind + "'");
  }

  std::ofstream out(out_path, std::ios::trunc);
  if (!out) throw strew::IoError("cannot write " + out_path);
  strew::ClueConfig clue_cfg = cfg.clue;
  clue_cfg.format.grammar = strew::grammar_for(kind);
  int fallbacks = 0;
  for (const auto& task : tasks) {
    clue_cfg.n_options = task.n_options();
    strew::ClueSession session =
        strew::run_clue_perception(*client, task.video, task.question, clue_cfg);
    if (session.fallback) ++fallbacks;
    out << strew::clue_session_to_json(session, task.id).dump() << '\n';
  }
  std::cout << "ran " << tasks.size() << " sessions (" << fallbacks
            << " clueless fallbacks) -> " << out_path << '\n';
  return 0;
}

int run_serve(const GlobalOpts& opts, const std::string& host, int port) {
  strew::AppConfig cfg = resolve_config(opts);
  strew::RewardService service(cfg);
  int bound = service.start(host, port);
  std::cout << "strew reward service listening on " << host << ":" << bound << '\n';
  std::cout << "POST /score, GET /healthz; Ctrl-C to stop" << std::endl;
  // park the main thread; the service owns its worker
  std::promise<void> never;
  never.get_future().wait();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string("strew ") + strew::kEngineVersion +
               " - verifiable spatio-temporal rewards and GRPO toolkit"};
  app.require_subcommand(1);

  GlobalOpts opts;
  std::string config_path, log_level = "warn";
  uint64_t seed = 0;
  bool seed_set = false;
  app.add_option("--config", config_path, "JSON config file (STREW_* env vars override)");
  auto* seed_opt = app.add_option("--seed", seed, "run seed");
  app.add_option("--log-level", log_level, "error|warn|info|debug");

  auto* score = app.add_subcommand("score", "score candidates against one task");
  std::string request_path;
  score->add_option("--request", request_path, "ScoreRequest JSON file")->required();

  auto* eval = app.add_subcommand("eval", "compute metrics for a prediction file");
  std::string pred_path, gt_path, kind_name = "grounding", eval_out;
  eval->add_option("--pred", pred_path, "predictions JSONL")->required();
  eval->add_option("--gt", gt_path, "ground-truth JSONL")->required();
  eval->add_option("--task", kind_name, "task kind")->required();
  eval->add_option("--out", eval_out, "write the report here instead of stdout");

  auto* train = app.add_subcommand("train-toy", "train the toy policy");
  std::string algo = "grpo", report_out, stats_out;
  int steps = -1;
  train->add_option("--algo", algo, "grpo|sft")->check(CLI::IsMember({"grpo", "sft"}));
  train->add_option("--steps", steps, "override configured step count");
  train->add_option("--out", report_out, "report JSON path (stdout when omitted)");
  train->add_option("--stats", stats_out, "per-step stats JSONL path");

  auto* gen = app.add_subcommand("gen-synth", "generate synthetic task files");
  std::string gen_kind = "grounding", gen_out, mix_spec;
  int gen_n = 100;
  gen->add_option("--kind", gen_kind, "task kind");
  gen->add_option("--n", gen_n, "number of instances")->check(CLI::PositiveNumber);
  gen->add_option("--out", gen_out, "output JSONL path")->required();
  gen->add_option("--mix", mix_spec, "'default' or kind:ratio,... blend");

  auto* clue = app.add_subcommand("clue-run", "run the two-pass clue pipeline");
  std::string clue_tasks, clue_kind = "gqa", clue_client = "mock", clue_script, clue_url,
              clue_out;
  clue->add_option("--tasks", clue_tasks, "task JSONL file")->required();
  clue->add_option("--task", clue_kind, "task kind");
  clue->add_option("--client", clue_client, "mock|http");
  clue->add_option("--script", clue_script, "script file for the mock client");
  clue->add_option("--url", clue_url, "model endpoint for the http client");
  clue->add_option("--out", clue_out, "session JSONL output")->required();

  auto* serve = app.add_subcommand("serve", "run the reward-scoring HTTP service");
  std::string host = "127.0.0.1";
  int port = 8710;
  serve->add_option("--host", host, "bind address");
  serve->add_option("--port", port, "bind port");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;  // usage errors exit 1, --help exits 0
  }

  if (!strew::set_log_level(log_level)) {
    std::cerr << "[usage] unknown log level '" << log_level << "'\n";
    return 1;
  }
  if (!config_path.empty()) opts.config_path = config_path;
  if (seed_opt->count() > 0) {
    seed_set = true;
    opts.seed = seed;
  }
  (void)seed_set;
  opts.log_level = log_level;

  try {
    if (*score) return run_score(opts, request_path);
    if (*eval) return run_eval(opts, pred_path, gt_path, kind_name, eval_out);
    if (*train) return run_train_toy(opts, algo, steps, report_out, stats_out);
    if (*gen) return run_gen_synth(opts, gen_kind, gen_n, gen_out, mix_spec);
    if (*clue)
      return run_clue(opts, clue_tasks, clue_kind, clue_client, clue_script, clue_url,
                      clue_out);
    if (*serve) return run_serve(opts, host, port);
  } catch (const strew::ClientError& e) {
    std::cerr << "[clue] " << e.what() << '\n';
    return 2;
  } catch (const strew::Error& e) {
    std::cerr << "[runtime] " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "[runtime] " << e.what() << '\n';
    return 2;
  }
  return 1;
}
