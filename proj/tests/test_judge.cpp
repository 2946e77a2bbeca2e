#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <httplib.h>

#include <atomic>
#include <json.hpp>
#include <thread>

#include "strew/judge.hpp"
#include "strew/rng.hpp"

using namespace strew;

TEST_CASE("oracle decompose normalizes and dedupes") {
  OracleJudge judge;
  auto events = judge.decompose("events: A dog Runs; a dog runs");
  REQUIRE(events.size() == 1);
  CHECK(events[0] == "a dog runs");

  events = judge.decompose("events: a; b ;; c");
  CHECK(events == std::vector<std::string>{"a", "b", "c"});

  CHECK(judge.decompose("").empty());
  CHECK(judge.decompose("   ").empty());
  // prefix is optional
  CHECK(judge.decompose("a cat sits; a dog runs").size() == 2);
}

TEST_CASE("oracle entailment is exact membership") {
  OracleJudge judge;
  CHECK(judge.entails("a dog runs", "events: a dog runs; a cat sits"));
  CHECK(judge.entails("A DOG   RUNS", "events: a dog runs; a cat sits"));
  CHECK_FALSE(judge.entails("a bird flies", "events: a dog runs; a cat sits"));
}

TEST_CASE("event_recall examples") {
  OracleJudge judge;
  CHECK(event_recall("events: a; b", "events: a; b", judge).recall == 1.0);
  auto v = event_recall("events: a; b; c", "events: a; b; c; d", judge);
  CHECK(v.recall == doctest::Approx(0.75));
  CHECK(v.gt_events.size() == 4);
  CHECK(event_recall("", "events: a; b", judge).recall == 0.0);
  // empty gt event list: defined as zero
  CHECK(event_recall("events: a", "", judge).recall == 0.0);
}

namespace {

// same verdicts, permuted decomposition order
class ReversedOracle : public Judge {
 public:
  std::vector<std::string> decompose(const std::string& caption) override {
    auto events = inner_.decompose(caption);
    std::reverse(events.begin(), events.end());
    return events;
  }
  bool entails(const std::string& event, const std::string& caption) override {
    return inner_.entails(event, caption);
  }

 private:
  OracleJudge inner_;
};

}  // namespace

TEST_CASE("recall is invariant under gt event permutation") {
  OracleJudge a;
  ReversedOracle b;
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    std::string gt = "events:", pred = "events:";
    int n = rng.uniform_int(1, 6);
    for (int e = 0; e < n; ++e) {
      gt += " e" + std::to_string(e) + ";";
      if (rng.uniform() < 0.6) pred += " e" + std::to_string(e) + ";";
    }
    CHECK(event_recall(pred, gt, a).recall == event_recall(pred, gt, b).recall);
  }
}

TEST_CASE("recall is monotone as pred gains entailed events") {
  OracleJudge judge;
  std::string gt = "events: a; b; c; d";
  std::string pred = "events: z";
  double last = event_recall(pred, gt, judge).recall;
  for (const char* extra : {"a", "b", "c", "d"}) {
    pred += std::string("; ") + extra;
    double now = event_recall(pred, gt, judge).recall;
    CHECK(now >= last);
    last = now;
  }
  CHECK(last == 1.0);
}

// ---------------------------------------------------------------------------
// Remote judge against a scripted local endpoint
// ---------------------------------------------------------------------------

namespace {

struct MockEndpoint {
  httplib::Server server;
  std::thread worker;
  int port = 0;
  std::atomic<int> calls{0};

  explicit MockEndpoint(std::function<std::string(int call, const std::string& prompt)> script) {
    server.Post("/v1/chat/completions",
                [this, script](const httplib::Request& req, httplib::Response& res) {
                  int call = calls.fetch_add(1);
                  std::string prompt =
                      nlohmann::json::parse(req.body)["messages"][0]["content"];
                  std::string reply = script(call, prompt);
                  if (reply == "\x01fail") {
                    res.status = 500;
                    return;
                  }
                  nlohmann::json body{
                      {"choices",
                       {{{"message", {{"role", "assistant"}, {"content", reply}}}}}}};
                  res.set_content(body.dump(), "application/json");
                });
    port = server.bind_to_any_port("127.0.0.1");
    worker = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~MockEndpoint() {
    server.stop();
    worker.join();
  }
  RemoteJudgeConfig config() const {
    RemoteJudgeConfig cfg;
    cfg.base_url = "http://127.0.0.1:" + std::to_string(port);
    cfg.backoff_base_ms = 1;
    cfg.timeout_ms = 2000;
    return cfg;
  }
};

}  // namespace

TEST_CASE("remote judge parses scripted verdicts") {
  MockEndpoint endpoint([](int, const std::string& prompt) -> std::string {
    if (prompt.find("Decompose") != std::string::npos)
      return "1. a dog runs\n2) a cat sits\n3: a dog runs";
    return "1. yes\n2. no";
  });
  RemoteJudge judge(endpoint.config());
  auto verdict = event_recall("whatever text", "the dog and cat clip", judge);
  REQUIRE(verdict.gt_events.size() == 2);  // dedup dropped the repeat
  CHECK(verdict.gt_events[0] == "a dog runs");
  CHECK(verdict.recall == doctest::Approx(0.5));
  CHECK(endpoint.calls == 2);  // one decompose + one batched entailment
}

TEST_CASE("remote judge retries malformed replies") {
  MockEndpoint endpoint([](int call, const std::string&) -> std::string {
    if (call == 0) return "no numbered list here";
    return "1. something happens";
  });
  RemoteJudge judge(endpoint.config());
  auto events = judge.decompose("any caption");
  REQUIRE(events.size() == 1);
  CHECK(endpoint.calls == 2);
}

TEST_CASE("remote judge gives up after retry exhaustion") {
  MockEndpoint endpoint([](int, const std::string&) { return std::string("\x01") + "fail"; });
  RemoteJudge judge(endpoint.config());
  CHECK_THROWS_AS(judge.decompose("caption"), JudgeUnavailable);
  CHECK(endpoint.calls == 3);  // initial try + 2 retries
}

TEST_CASE("remote judge surfaces unreachable endpoints") {
  RemoteJudgeConfig cfg;
  cfg.base_url = "http://127.0.0.1:1";  // nothing listens there
  cfg.backoff_base_ms = 1;
  cfg.timeout_ms = 200;
  RemoteJudge judge(cfg);
  CHECK_THROWS_AS(judge.entails("e", "caption"), JudgeUnavailable);
}

TEST_CASE("remote judge: empty caption never hits the wire") {
  MockEndpoint endpoint([](int, const std::string&) { return std::string("1. x"); });
  RemoteJudge judge(endpoint.config());
  CHECK(judge.decompose("").empty());
  CHECK(endpoint.calls == 0);
}
