#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "strew/dataset.hpp"
#include "strew/serde.hpp"

using namespace strew;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("strew-dataset-" + std::to_string(::getpid()) + "-" +
            std::to_string(reinterpret_cast<uintptr_t>(this)));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("write/load round trip per task kind") {
  TempDir dir;
  for (TaskKind kind : {TaskKind::TemporalGrounding, TaskKind::ObjectTracking,
                        TaskKind::MultiChoiceQA, TaskKind::GroundingQA, TaskKind::Captioning,
                        TaskKind::QualityAssessment}) {
    auto tasks = synth_mirror(11, kind, 20);
    std::string path = dir.file(std::string("rt-") + to_string(kind) + ".jsonl");
    write_task_file(tasks, path);
    auto back = load_task_file(path, kind);
    REQUIRE(back.size() == tasks.size());
    for (size_t i = 0; i < tasks.size(); ++i) CHECK(back[i] == tasks[i]);
  }
}

TEST_CASE("load: well-formed file and empty file") {
  TempDir dir;
  std::string path = dir.file("three.jsonl");
  {
    std::ofstream out(path);
    auto tasks = synth_mirror(5, TaskKind::TemporalGrounding, 3);
    for (const auto& t : tasks) out << task_to_json(t).dump() << '\n';
  }
  CHECK(load_task_file(path, TaskKind::TemporalGrounding).size() == 3);

  std::string empty = dir.file("empty.jsonl");
  std::ofstream(empty).close();
  CHECK(load_task_file(empty, TaskKind::TemporalGrounding).empty());

  CHECK_THROWS_AS(load_task_file(dir.file("missing.jsonl"), TaskKind::TemporalGrounding),
                  IoError);
}

TEST_CASE("load: schema violations carry line numbers") {
  TempDir dir;
  auto good = synth_mirror(2, TaskKind::TemporalGrounding, 2);
  std::string path = dir.file("bad.jsonl");

  auto write_with_bad_line = [&](const json& bad) {
    std::ofstream out(path);
    out << task_to_json(good[0]).dump() << '\n';
    out << bad.dump() << '\n';
  };

  // end < start
  json bad = task_to_json(good[1]);
  bad["gt"]["interval"] = json::array({9.0, 3.0});
  write_with_bad_line(bad);
  try {
    load_task_file(path, TaskKind::TemporalGrounding);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(e.line == 2);
  }

  // gt interval outside the video duration
  bad = task_to_json(good[1]);
  bad["gt"]["interval"] = json::array({1.0, bad["video"]["duration"].get<double>() + 5.0});
  write_with_bad_line(bad);
  CHECK_THROWS_AS(load_task_file(path, TaskKind::TemporalGrounding), SchemaError);

  // options on a non-choice kind
  bad = task_to_json(good[1]);
  bad["options"] = json::array({"a", "b"});
  write_with_bad_line(bad);
  CHECK_THROWS_AS(load_task_file(path, TaskKind::TemporalGrounding), SchemaError);

  // duplicate id
  write_with_bad_line(task_to_json(good[0]));
  CHECK_THROWS_AS(load_task_file(path, TaskKind::TemporalGrounding), SchemaError);

  // kind mismatch against the requested schema
  write_with_bad_line(task_to_json(synth_mirror(3, TaskKind::MultiChoiceQA, 1)[0]));
  CHECK_THROWS_AS(load_task_file(path, TaskKind::TemporalGrounding), SchemaError);

  // invalid JSON
  {
    std::ofstream out(path);
    out << "{not json\n";
  }
  CHECK_THROWS_AS(load_task_file(path, TaskKind::TemporalGrounding), SchemaError);
}

TEST_CASE("validate_instance: choice letter must fit the option count") {
  auto tasks = synth_mirror(9, TaskKind::MultiChoiceQA, 1);
  TaskInstance bad = tasks[0];
  bad.options = std::vector<std::string>{"one", "two"};
  bad.gt.value = ChoiceLetter{'E'};
  CHECK_THROWS_AS(validate_instance(bad), SchemaError);
}

TEST_CASE("synth_mirror: deterministic, valid, kind-correct") {
  auto a = synth_mirror(123, TaskKind::GroundingQA, 50);
  auto b = synth_mirror(123, TaskKind::GroundingQA, 50);
  REQUIRE(a.size() == 50);
  for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
  for (const auto& t : a) {
    CHECK(t.kind == TaskKind::GroundingQA);
    CHECK(t.options.has_value());
    const auto& cwc = t.gt.choice_with_clue();
    CHECK(cwc.clue.start >= 0.0);
    CHECK(cwc.clue.end <= t.video.duration);
    validate_instance(t);  // throws on violation
  }
  auto c = synth_mirror(124, TaskKind::GroundingQA, 50);
  CHECK(c[0].question != a[0].question);
}

TEST_CASE("synth questions are unique within a file") {
  auto tasks = synth_mirror(321, TaskKind::MultiChoiceQA, 200);
  std::set<std::string> questions;
  for (const auto& t : tasks) questions.insert(t.question);
  CHECK(questions.size() == tasks.size());
}

TEST_CASE("largest remainder rounding") {
  CHECK(largest_remainder_counts({0.30, 0.52, 0.18}, 100) == std::vector<int>{30, 52, 18});
  CHECK(largest_remainder_counts({0.3, 0.5, 0.2}, 100) == std::vector<int>{30, 50, 20});
  // corpus proportions scaled to 100: quotas 29.60 / 51.77 / 18.62
  CHECK(largest_remainder_counts({5338, 9335, 3358}, 100) == std::vector<int>{29, 52, 19});
  // equal remainders break ties toward the lower index
  CHECK(largest_remainder_counts({1, 1, 1}, 100) == std::vector<int>{34, 33, 33});
  CHECK(largest_remainder_counts({1, 1, 1}, 2) == std::vector<int>{1, 1, 0});
  // counts always sum to n
  CHECK(largest_remainder_counts({0.123, 0.456, 0.789, 0.001}, 997)[3] >= 0);
  auto counts = largest_remainder_counts({0.123, 0.456, 0.789, 0.001}, 997);
  int sum = 0;
  for (int c : counts) sum += c;
  CHECK(sum == 997);
  CHECK_THROWS_AS(largest_remainder_counts({}, 10), EmptyInput);
}

TEST_CASE("synth_mix honors the blend counts") {
  std::vector<MixComponent> mix{{TaskKind::TemporalGrounding, 0.30},
                                {TaskKind::ObjectTracking, 0.52},
                                {TaskKind::GroundingQA, 0.18}};
  auto tasks = synth_mix(5, mix, 100);
  REQUIRE(tasks.size() == 100);
  int tg = 0, tr = 0, gqa = 0;
  for (const auto& t : tasks) {
    if (t.kind == TaskKind::TemporalGrounding) ++tg;
    if (t.kind == TaskKind::ObjectTracking) ++tr;
    if (t.kind == TaskKind::GroundingQA) ++gqa;
  }
  CHECK(tg == 30);
  CHECK(tr == 52);
  CHECK(gqa == 18);
  // deterministic
  auto again = synth_mix(5, mix, 100);
  for (size_t i = 0; i < tasks.size(); ++i) CHECK(tasks[i] == again[i]);
}

TEST_CASE("prediction loader accepts answer rows and task rows") {
  TempDir dir;
  auto tasks = synth_mirror(2, TaskKind::TemporalGrounding, 2);
  std::string path = dir.file("pred.jsonl");
  {
    std::ofstream out(path);
    out << json{{"id", tasks[0].id}, {"answer", "3 to 9"}}.dump() << '\n';
    out << task_to_json(tasks[1]).dump() << '\n';
  }
  auto preds = load_prediction_file(path, TaskKind::TemporalGrounding);
  REQUIRE(preds.size() == 2);
  CHECK(std::holds_alternative<std::string>(preds[0].content));
  CHECK(std::holds_alternative<GroundTruth>(preds[1].content));
  CHECK(std::get<GroundTruth>(preds[1].content) == tasks[1].gt);

  {
    std::ofstream out(path);
    out << json{{"id", "x"}}.dump() << '\n';  // neither answer nor gt
  }
  CHECK_THROWS_AS(load_prediction_file(path, TaskKind::TemporalGrounding), SchemaError);
}
