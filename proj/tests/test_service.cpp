#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <httplib.h>

#include "strew/dataset.hpp"
#include "strew/service.hpp"
#include "test_support.hpp"

using namespace strew;

namespace {

ScoreRequest grounding_request() {
  ScoreRequest req;
  req.task = testsup::make_grounding_task("svc-1", {4, 8});
  req.candidates = {"<answer>4.000 to 8.000</answer>", "<answer>20.000 to 25.000</answer>"};
  req.normalize = true;
  req.requires_think = false;
  return req;
}

}  // namespace

TEST_CASE("handle_score equals the direct library computation") {
  ScoreRequest req = grounding_request();
  OracleJudge judge;
  GrpoConfig grpo;
  ScoreResponse res = handle_score(req, judge, grpo);

  auto breakdowns = score_group(req.task, req.candidates, &judge, req.requires_think);
  REQUIRE(res.breakdowns.size() == breakdowns.size());
  for (size_t i = 0; i < breakdowns.size(); ++i) CHECK(res.breakdowns[i] == breakdowns[i]);

  std::vector<double> totals;
  for (const auto& b : breakdowns) totals.push_back(b.total);
  CHECK(res.advantages == group_advantages(totals, grpo.epsilon_sigma).advantages);
  CHECK(res.engine_version == std::string("strew/0.1.0"));
}

TEST_CASE("score_request_from_json validates") {
  json body = score_request_to_json(grounding_request());
  ScoreRequest parsed = score_request_from_json(body);
  CHECK(parsed.candidates.size() == 2);
  CHECK(parsed.normalize);

  json no_candidates = body;
  no_candidates["candidates"] = json::array();
  CHECK_THROWS_AS(score_request_from_json(no_candidates), SchemaError);

  json one_candidate = body;
  one_candidate["candidates"] = json::array({"<answer>1 to 2</answer>"});
  CHECK_THROWS_AS(score_request_from_json(one_candidate), SchemaError);  // normalize wants 2+

  one_candidate["normalize"] = false;
  CHECK(score_request_from_json(one_candidate).candidates.size() == 1);

  json bad_task = body;
  bad_task["task"]["gt"]["interval"] = json::array({9.0, 1.0});
  CHECK_THROWS_AS(score_request_from_json(bad_task), SchemaError);
}

TEST_CASE("service round trip over HTTP matches the library") {
  AppConfig cfg;
  RewardService service(cfg);
  int port = service.start("127.0.0.1", 0);
  httplib::Client client("127.0.0.1", port);

  auto health = client.Get("/healthz");
  REQUIRE(health);
  CHECK(health->status == 200);
  CHECK(json::parse(health->body)["engine_version"] == "strew/0.1.0");

  ScoreRequest req = grounding_request();
  auto res = client.Post("/score", score_request_to_json(req).dump(), "application/json");
  REQUIRE(res);
  REQUIRE(res->status == 200);

  OracleJudge judge;
  json expected = score_response_to_json(handle_score(req, judge, cfg.grpo));
  CHECK(json::parse(res->body) == expected);

  // stateless: the same request scores identically again
  auto res2 = client.Post("/score", score_request_to_json(req).dump(), "application/json");
  REQUIRE(res2);
  CHECK(res2->body == res->body);

  service.stop();
}

TEST_CASE("service error mapping") {
  AppConfig cfg;
  RewardService service(cfg);
  int port = service.start("127.0.0.1", 0);
  httplib::Client client("127.0.0.1", port);

  auto bad_json = client.Post("/score", "{nope", "application/json");
  REQUIRE(bad_json);
  CHECK(bad_json->status == 400);

  json one = score_request_to_json(grounding_request());
  one["candidates"] = json::array({"<answer>1 to 2</answer>"});
  one["normalize"] = true;
  auto normalize_one = client.Post("/score", one.dump(), "application/json");
  REQUIRE(normalize_one);
  CHECK(normalize_one->status == 400);

  service.stop();
}

TEST_CASE("judge outage surfaces as 502") {
  AppConfig cfg;
  cfg.judge.type = "http";
  cfg.judge.remote.base_url = "http://127.0.0.1:1";  // unreachable
  cfg.judge.remote.max_retries = 0;
  cfg.judge.remote.backoff_base_ms = 1;
  cfg.judge.remote.timeout_ms = 200;
  RewardService service(cfg);
  int port = service.start("127.0.0.1", 0);
  httplib::Client client("127.0.0.1", port);
  client.set_read_timeout(10, 0);

  ScoreRequest req;
  req.task = testsup::make_caption_task("svc-cap", "events: a; b");
  req.candidates = {"<answer>events: a</answer>"};
  req.requires_think = false;
  auto res = client.Post("/score", score_request_to_json(req).dump(), "application/json");
  REQUIRE(res);
  CHECK(res->status == 502);

  service.stop();
}
