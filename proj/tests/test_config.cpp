#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "strew/config.hpp"
#include "strew/serde.hpp"

using namespace strew;

namespace {

struct EnvGuard {
  std::vector<std::string> names;
  ~EnvGuard() {
    for (const auto& n : names) ::unsetenv(n.c_str());
  }
  void set(const char* name, const char* value) {
    ::setenv(name, value, 1);
    names.push_back(name);
  }
};

}  // namespace

TEST_CASE("defaults without a config file") {
  AppConfig cfg = load_config(std::nullopt);
  CHECK(cfg.judge.type == "oracle");
  CHECK(cfg.grpo.group_size == 8);
  CHECK(cfg.grpo.clip_epsilon == 0.2);
  CHECK(cfg.grpo.kl_coefficient == 0.04);
  CHECK(cfg.grpo.learning_rate == 0.05);
  CHECK(cfg.clue.padding == 2.0);
}

TEST_CASE("config file values and env overrides") {
  namespace fs = std::filesystem;
  fs::path path = fs::temp_directory_path() /
                  ("strew-config-" + std::to_string(::getpid()) + ".json");
  {
    std::ofstream out(path);
    out << json{{"judge", {{"type", "http"}, {"url", "http://judge:9}0"}}},
                {"grpo", {{"group_size", 16}, {"seed", 42}}},
                {"clue", {{"padding", 3.5}}},
                {"toy", {{"steps", 77}, {"env", {{"n_archetypes", 4}}}}}}
               .dump();
  }

  {
    AppConfig cfg = load_config(path.string());
    CHECK(cfg.judge.type == "http");
    CHECK(cfg.grpo.group_size == 16);
    CHECK(cfg.grpo.seed == 42);
    CHECK(cfg.clue.padding == 3.5);
    CHECK(cfg.toy.steps == 77);
    CHECK(cfg.toy.env.n_archetypes == 4);
    CHECK(cfg.toy.grpo.group_size == 16);  // grpo block feeds the toy trainer
  }

  {
    EnvGuard env;
    env.set("STREW_JUDGE_TYPE", "oracle");
    env.set("STREW_GROUP_SIZE", "4");
    env.set("STREW_SEED", "99");
    AppConfig cfg = load_config(path.string());
    CHECK(cfg.judge.type == "oracle");  // env wins over the file
    CHECK(cfg.grpo.group_size == 4);
    CHECK(cfg.grpo.seed == 99);
  }

  fs::remove(path);
}

TEST_CASE("invalid judge type is rejected") {
  EnvGuard env;
  env.set("STREW_JUDGE_TYPE", "fortune-teller");
  CHECK_THROWS_AS(load_config(std::nullopt), SchemaError);
}

TEST_CASE("make_judge picks the backend") {
  JudgeSelection oracle;
  CHECK(dynamic_cast<OracleJudge*>(make_judge(oracle).get()) != nullptr);
  JudgeSelection http;
  http.type = "http";
  CHECK(dynamic_cast<RemoteJudge*>(make_judge(http).get()) != nullptr);
}
