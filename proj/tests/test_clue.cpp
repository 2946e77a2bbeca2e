#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "strew/clue.hpp"
#include "strew/rng.hpp"
#include "strew/serde.hpp"

using namespace strew;

namespace {

const VideoRef kVideo{"synth://video/clip", 60.0, 1.0, 320, 240};

ParsedResponse answer_only(const std::string& answer_text) {
  ParsedResponse r;
  r.answer_present = true;
  r.answer_raw = answer_text;
  r.payload = ParseFailure{};
  return r;
}

}  // namespace

TEST_CASE("extract_temporal_clues") {
  ParsedResponse with_clue;
  with_clue.payload = ChoiceWithClue{ChoiceLetter{'C'}, {10, 20}};
  auto clues = extract_temporal_clues(with_clue);
  REQUIRE(clues.size() == 1);
  CHECK(clues[0] == TemporalInterval{10, 20});

  clues = extract_temporal_clues(answer_only("between 3.0 to 5.0 and 8.0 to 9.0"));
  REQUIRE(clues.size() == 2);
  CHECK(clues[0] == TemporalInterval{3, 5});
  CHECK(clues[1] == TemporalInterval{8, 9});

  CHECK(extract_temporal_clues(answer_only("the answer is C")).empty());
  // odd trailing number is dropped
  CHECK(extract_temporal_clues(answer_only("1.0 to 2.0 and 7")).size() == 1);
}

TEST_CASE("select_segments: padding, merge, clamp") {
  auto one = select_segments(kVideo, {{10, 20}}, 2.0);
  REQUIRE(one.size() == 1);
  CHECK(one[0] == TemporalInterval{8, 22});

  auto merged = select_segments(kVideo, {{1, 3}, {4, 6}}, 1.0);
  REQUIRE(merged.size() == 1);
  CHECK(merged[0] == TemporalInterval{0, 7});

  auto clamped = select_segments(kVideo, {{0, 2}}, 5.0);
  REQUIRE(clamped.size() == 1);
  CHECK(clamped[0] == TemporalInterval{0, 7});

  auto apart = select_segments(kVideo, {{40, 45}, {5, 8}}, 1.0);
  REQUIRE(apart.size() == 2);
  CHECK(apart[0].start < apart[1].start);
}

TEST_CASE("segments are sorted, disjoint, in range, and cover every clue") {
  Rng rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<TemporalInterval> clues;
    int n = rng.uniform_int(1, 6);
    for (int i = 0; i < n; ++i) {
      double a = rng.uniform(0.0, kVideo.duration);
      double b = rng.uniform(0.0, kVideo.duration);
      clues.push_back({std::min(a, b), std::max(a, b)});
    }
    double padding = rng.uniform(0.0, 5.0);
    auto segments = select_segments(kVideo, clues, padding);
    REQUIRE(!segments.empty());
    for (size_t i = 0; i < segments.size(); ++i) {
      CHECK(segments[i].start >= 0.0);
      CHECK(segments[i].end <= kVideo.duration);
      CHECK(segments[i].start <= segments[i].end);
      if (i > 0) CHECK(segments[i].start > segments[i - 1].end);
    }
    for (const auto& clue : clues) {
      bool covered = false;
      for (const auto& seg : segments)
        if (seg.start <= std::max(0.0, clue.start - padding) + 1e-9 &&
            std::min(kVideo.duration, clue.end + padding) <= seg.end + 1e-9)
          covered = true;
      // the padded clue, clamped to the video, must sit inside one segment
      CHECK(covered);
    }
  }
}

TEST_CASE("upsample_request: boost factors and caps") {
  FormatSpec fmt{false, AnswerGrammar::ChoiceWithClue};
  std::vector<TemporalInterval> segments{{8, 22}};

  auto req = upsample_request(kVideo, segments, 1.0, 4.0, "q", 1e12, fmt);
  CHECK(req.fps == doctest::Approx(4.0));
  CHECK(req.width == 320);
  CHECK(req.height == 240);

  req = upsample_request(kVideo, segments, 2.0, 1.0, "q", 1e12, fmt);
  CHECK(req.width == 640);
  CHECK(req.height == 480);

  // budget exactly at base: both factors collapse to 1
  double base_cost = (22.0 - 8.0) * kVideo.base_fps * kVideo.width * kVideo.height;
  req = upsample_request(kVideo, segments, 2.0, 4.0, "q", base_cost, fmt);
  CHECK(req.fps == doctest::Approx(kVideo.base_fps));
  CHECK(req.width == kVideo.width);
  CHECK(req.height == kVideo.height);

  // room for the fps boost but not the resolution boost
  req = upsample_request(kVideo, segments, 2.0, 2.0, "q", base_cost * 2.0, fmt);
  CHECK(req.fps == doctest::Approx(2.0));
  CHECK(req.width == kVideo.width);

  CHECK_THROWS_AS(upsample_request(kVideo, segments, 2.0, 2.0, "q", base_cost / 2.0, fmt),
                  BudgetInfeasible);
  CHECK_THROWS_AS(upsample_request(kVideo, segments, 0.5, 2.0, "q", 1e12, fmt), Error);
}

TEST_CASE("upsample_request: emitted cost never exceeds the budget") {
  Rng rng(14);
  FormatSpec fmt{false, AnswerGrammar::ChoiceWithClue};
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<TemporalInterval> segments;
    int n = rng.uniform_int(1, 4);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      double a = rng.uniform(0.0, 50.0);
      double len = rng.uniform(0.5, 10.0);
      segments.push_back({a, std::min(kVideo.duration, a + len)});
      total += segments.back().length();
    }
    double base_cost = total * kVideo.base_fps * kVideo.width * kVideo.height;
    double budget = base_cost * rng.uniform(1.0, 20.0);
    double dres = rng.uniform(1.0, 4.0), dfps = rng.uniform(1.0, 6.0);
    auto req = upsample_request(kVideo, segments, dres, dfps, "q", budget, fmt);
    double cost = total * req.fps * req.width * req.height;
    CHECK(cost <= budget);
    CHECK(req.fps >= kVideo.base_fps - 1e-9);
    CHECK(req.width >= kVideo.width);
    CHECK(req.height >= kVideo.height);
  }
}

TEST_CASE("run_clue_perception: two calls when clued, one on fallback") {
  ClueConfig cfg;
  cfg.format.grammar = AnswerGrammar::ChoiceWithClue;

  ScriptedModelClient client;
  client.add("clued?", {"<answer>B, 10.000 to 20.000</answer>",
                        "<answer>C, 11.000 to 19.000</answer>"});
  ClueSession session = run_clue_perception(client, kVideo, "clued?", cfg);
  CHECK(session.client_calls == 2);
  CHECK_FALSE(session.fallback);
  REQUIRE(session.second_request.has_value());
  CHECK(session.second_request->fps == doctest::Approx(2.0));
  CHECK(std::get<ChoiceWithClue>(session.first_answer.payload).choice == ChoiceLetter{'B'});
  CHECK(std::get<ChoiceWithClue>(session.final_answer.payload).choice == ChoiceLetter{'C'});
  REQUIRE(session.segments.size() == 1);
  CHECK(session.segments[0] == TemporalInterval{8, 22});

  ScriptedModelClient clueless;
  clueless.add("clueless?", {"<answer>B</answer>"});
  session = run_clue_perception(clueless, kVideo, "clueless?", cfg);
  CHECK(session.client_calls == 1);
  CHECK(session.fallback);
  CHECK(session.final_raw == session.first_raw);
  CHECK_FALSE(session.second_request.has_value());
}

TEST_CASE("run_clue_perception: client failures carry the phase tag") {
  ClueConfig cfg;
  ScriptedModelClient empty;
  try {
    run_clue_perception(empty, kVideo, "anything", cfg);
    FAIL("expected ClientError");
  } catch (const ClientError& e) {
    CHECK(e.phase == "first_pass");
  }

  ScriptedModelClient one_shot;
  one_shot.add("q", {"<answer>B, 10.000 to 20.000</answer>"});  // second call re-serves it
  ClueSession ok = run_clue_perception(one_shot, kVideo, "q", cfg);
  CHECK(ok.client_calls == 2);
}

TEST_CASE("scripted client loads from a script file") {
  namespace fs = std::filesystem;
  fs::path path = fs::temp_directory_path() /
                  ("strew-clue-script-" + std::to_string(::getpid()) + ".json");
  {
    std::ofstream out(path);
    out << json{{"responses",
                 {{"q1", json::array({"<answer>A, 1 to 2</answer>",
                                      "<answer>B, 1 to 2</answer>"})}}}}
               .dump();
  }
  auto client = ScriptedModelClient::from_file(path.string());
  PerceptionRequest req;
  req.question = "q1";
  CHECK(client->answer(req) == "<answer>A, 1 to 2</answer>");
  CHECK(client->answer(req) == "<answer>B, 1 to 2</answer>");
  CHECK(client->answer(req) == "<answer>B, 1 to 2</answer>");  // last reply repeats
  fs::remove(path);
}
