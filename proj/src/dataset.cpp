#include "strew/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include "strew/parse.hpp"
#include "strew/rng.hpp"
#include "strew/serde.hpp"

namespace strew {

namespace {

double round_ms(double seconds) { return std::llround(seconds * 1000.0) / 1000.0; }

void check_interval_in_video(const TemporalInterval& interval, const VideoRef& video,
                             const char* what) {
  if (interval.start < 0.0 || interval.end > video.duration + 1e-9)
    throw SchemaError(std::string(what) + " must lie within [0, video.duration]");
}

const std::vector<std::string>& colors() {
  static const std::vector<std::string> v{"red",  "blue",  "green", "yellow",
                                          "black", "white", "orange", "purple"};
  return v;
}

const std::vector<std::string>& objects() {
  static const std::vector<std::string> v{"car",    "dog",  "person", "ball",
                                          "bicycle", "bird", "robot",  "boat"};
  return v;
}

const std::vector<std::string>& actions() {
  static const std::vector<std::string> v{"turns around", "jumps",       "enters the room",
                                          "falls over",   "speeds up",   "waves"};
  return v;
}

std::string subject_phrase(int combo) {
  int n_colors = static_cast<int>(colors().size());
  int n_objects = static_cast<int>(objects().size());
  int color = combo % n_colors;
  int object = (combo / n_colors) % n_objects;
  int action = combo / (n_colors * n_objects);
  return "the " + colors()[color] + " " + objects()[object] + " " +
         actions()[action % actions().size()];
}

int max_combos() {
  return static_cast<int>(colors().size() * objects().size() * actions().size());
}

// distinct phrase indices so questions stay unique within one file
std::vector<int> combo_order(Rng& rng, int n) {
  std::vector<int> order(max_combos());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  if (n <= static_cast<int>(order.size()))
    return {order.begin(), order.begin() + n};
  std::vector<int> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.push_back(order[i % order.size()]);
  return out;
}

VideoRef make_video(Rng& rng, const std::string& id) {
  VideoRef v;
  v.uri = "synth://video/" + id;
  v.duration = round_ms(rng.uniform(20.0, 60.0));
  v.base_fps = 1.0;
  v.width = 320;
  v.height = 240;
  return v;
}

TemporalInterval random_event(Rng& rng, double duration) {
  double len = rng.uniform(0.08, 0.45) * duration;
  double start = rng.uniform(0.0, duration - len);
  TemporalInterval out{round_ms(start), round_ms(start + len)};
  out.end = std::min(out.end, duration);
  return out;
}

const char* kind_prefix(TaskKind kind) {
  switch (kind) {
    case TaskKind::TemporalGrounding: return "tg";
    case TaskKind::ObjectTracking: return "tr";
    case TaskKind::MultiChoiceQA: return "qa";
    case TaskKind::GroundingQA: return "gqa";
    case TaskKind::Captioning: return "cap";
    case TaskKind::QualityAssessment: return "va";
  }
  return "task";
}

std::string format_id(TaskKind kind, int i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s-%05d", kind_prefix(kind), i);
  return buf;
}

std::vector<std::string> make_options(Rng& rng, int count, int combo) {
  std::vector<std::string> options;
  for (int i = 0; i < count; ++i) {
    int alt = (combo + 1 + i * 37) % max_combos();
    options.push_back("it is " + subject_phrase(alt));
  }
  rng.shuffle(options);
  return options;
}

}  // namespace

void validate_instance(const TaskInstance& task) {
  if (task.id.empty()) throw SchemaError("id must be a non-empty string");
  if (task.video.duration <= 0.0) throw SchemaError("video.duration must be > 0");
  if (task.video.base_fps <= 0.0) throw SchemaError("video.fps must be > 0");
  if (task.video.width <= 0 || task.video.height <= 0)
    throw SchemaError("video.resolution must be positive");

  if (is_choice_kind(task.kind)) {
    if (!task.options) throw SchemaError("options required for choice tasks");
    size_t count = task.options->size();
    if (count < 2 || count > 5) throw SchemaError("options must hold 2 to 5 entries");
  } else if (task.options) {
    throw SchemaError("options only allowed on choice tasks");
  }

  switch (task.kind) {
    case TaskKind::TemporalGrounding:
      check_interval_in_video(task.gt.interval(), task.video, "gt.interval");
      break;
    case TaskKind::ObjectTracking:
      if (task.gt.boxes().empty()) throw SchemaError("gt.boxes must be non-empty");
      break;
    case TaskKind::MultiChoiceQA:
    case TaskKind::QualityAssessment:
      if (task.gt.choice().index() >= task.n_options())
        throw SchemaError("gt letter outside the option count");
      break;
    case TaskKind::GroundingQA: {
      const auto& cwc = task.gt.choice_with_clue();
      if (cwc.choice.index() >= task.n_options())
        throw SchemaError("gt letter outside the option count");
      check_interval_in_video(cwc.clue, task.video, "gt.clue");
      break;
    }
    case TaskKind::Captioning:
      if (task.gt.caption().text.empty()) throw SchemaError("gt.caption must be non-empty");
      break;
  }
}

std::vector<TaskInstance> load_task_file(const std::string& path, TaskKind kind) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<TaskInstance> out;
  std::unordered_set<std::string> ids;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      json j = json::parse(line);
      TaskInstance task = task_from_json(j);
      if (task.kind != kind)
        throw SchemaError(std::string("record kind '") + to_string(task.kind) +
                          "' does not match requested '" + to_string(kind) + "'");
      validate_instance(task);
      if (!ids.insert(task.id).second) throw SchemaError("duplicate id: " + task.id);
      out.push_back(std::move(task));
    } catch (const SchemaError& e) {
      throw SchemaError(line_no, e.what());
    } catch (const json::exception& e) {
      throw SchemaError(line_no, std::string("invalid JSON: ") + e.what());
    }
  }
  return out;
}

void write_task_file(const std::vector<TaskInstance>& instances, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  for (const auto& task : instances) out << task_to_json(task).dump() << '\n';
  if (!out) throw IoError("write failed for " + path);
}

std::vector<PredictionRecord> load_prediction_file(const std::string& path, TaskKind kind) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<PredictionRecord> out;
  std::unordered_set<std::string> ids;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      json j = json::parse(line);
      PredictionRecord rec;
      if (!j.contains("id") || !j["id"].is_string())
        throw SchemaError("id must be a string");
      rec.id = j["id"].get<std::string>();
      if (j.contains("answer")) {
        if (!j["answer"].is_string()) throw SchemaError("answer must be a string");
        rec.content = j["answer"].get<std::string>();
      } else if (j.contains("gt")) {
        rec.content = gt_from_json(j["gt"], kind);
      } else {
        throw SchemaError("prediction row needs an 'answer' or 'gt' field");
      }
      if (!ids.insert(rec.id).second) throw SchemaError("duplicate id: " + rec.id);
      out.push_back(std::move(rec));
    } catch (const SchemaError& e) {
      throw SchemaError(line_no, e.what());
    } catch (const json::exception& e) {
      throw SchemaError(line_no, std::string("invalid JSON: ") + e.what());
    }
  }
  return out;
}

std::vector<TaskInstance> synth_mirror(uint64_t seed, TaskKind kind, int n) {
  if (n < 1) throw EmptyInput("synth_mirror: n must be >= 1");
  Rng rng = Rng::derive(seed, std::string("synth/") + to_string(kind));
  std::vector<int> combos = combo_order(rng, n);
  std::vector<TaskInstance> out;
  out.reserve(n);

  for (int i = 0; i < n; ++i) {
    TaskInstance task;
    task.kind = kind;
    task.id = format_id(kind, i);
    task.video = make_video(rng, task.id);
    const std::string phrase = subject_phrase(combos[i]);

    switch (kind) {
      case TaskKind::TemporalGrounding:
        task.question = "When does " + phrase + "?";
        task.gt.value = random_event(rng, task.video.duration);
        break;
      case TaskKind::ObjectTracking: {
        int frames = rng.uniform_int(2, 6);
        std::vector<BoundingBox> boxes;
        double x = rng.uniform_int(0, task.video.width - 60);
        double y = rng.uniform_int(0, task.video.height - 60);
        for (int f = 0; f < frames; ++f) {
          double w = rng.uniform_int(20, 60);
          double h = rng.uniform_int(20, 60);
          x = std::clamp<double>(x + rng.uniform_int(-15, 15), 0, task.video.width - w);
          y = std::clamp<double>(y + rng.uniform_int(-15, 15), 0, task.video.height - h);
          boxes.push_back(BoundingBox{x, y, x + w, y + h});
        }
        task.question = "Track " + phrase + " across " + std::to_string(frames) + " frames.";
        task.gt.value = std::move(boxes);
        break;
      }
      case TaskKind::MultiChoiceQA: {
        int count = rng.uniform_int(2, 5);
        task.options = make_options(rng, count, combos[i]);
        task.question = "What happens when " + phrase + "?";
        task.gt.value = ChoiceLetter{static_cast<char>('A' + rng.uniform_int(0, count - 1))};
        break;
      }
      case TaskKind::GroundingQA: {
        int count = rng.uniform_int(2, 5);
        task.options = make_options(rng, count, combos[i]);
        task.question = "What happens after " + phrase + "?";
        task.gt.value = ChoiceWithClue{
            ChoiceLetter{static_cast<char>('A' + rng.uniform_int(0, count - 1))},
            random_event(rng, task.video.duration)};
        break;
      }
      case TaskKind::Captioning: {
        int events = rng.uniform_int(3, 6);
        std::string caption = "events:";
        for (int e = 0; e < events; ++e) {
          if (e > 0) caption += ';';
          caption += ' ' + subject_phrase((combos[i] + e * 53) % max_combos());
        }
        task.question = "Describe the video as an event list.";
        task.gt.value = Caption{caption};
        break;
      }
      case TaskKind::QualityAssessment: {
        task.options = std::vector<std::string>{"excellent quality", "good quality",
                                                "fair quality", "poor quality"};
        task.question = "Rate the visual quality of this clip.";
        task.gt.value = ChoiceLetter{static_cast<char>('A' + rng.uniform_int(0, 3))};
        break;
      }
    }
    validate_instance(task);
    out.push_back(std::move(task));
  }
  return out;
}

std::vector<int> largest_remainder_counts(const std::vector<double>& ratios, int n) {
  if (ratios.empty()) throw EmptyInput("largest_remainder_counts: no ratios");
  double total = 0.0;
  for (double r : ratios) {
    if (r < 0.0) throw SchemaError("ratios must be non-negative");
    total += r;
  }
  if (total <= 0.0) throw SchemaError("ratio sum must be positive");

  std::vector<int> counts(ratios.size(), 0);
  std::vector<std::pair<double, size_t>> remainders;
  int assigned = 0;
  for (size_t i = 0; i < ratios.size(); ++i) {
    double quota = ratios[i] / total * n;
    counts[i] = static_cast<int>(std::floor(quota));
    assigned += counts[i];
    remainders.emplace_back(quota - counts[i], i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (int k = 0; k < n - assigned; ++k) counts[remainders[k % remainders.size()].second]++;
  return counts;
}

const std::vector<MixComponent>& default_corpus_mix() {
  // joint spatio-temporal training blend: grounding / tracking / grounding QA
  static const std::vector<MixComponent> mix{
      {TaskKind::TemporalGrounding, 5338.0},
      {TaskKind::ObjectTracking, 9335.0},
      {TaskKind::GroundingQA, 3358.0},
  };
  return mix;
}

std::vector<TaskInstance> synth_mix(uint64_t seed, const std::vector<MixComponent>& mix,
                                    int n) {
  if (n < 1) throw EmptyInput("synth_mix: n must be >= 1");
  std::vector<double> ratios;
  for (const auto& c : mix) ratios.push_back(c.ratio);
  std::vector<int> counts = largest_remainder_counts(ratios, n);
  std::vector<TaskInstance> out;
  out.reserve(n);
  for (size_t i = 0; i < mix.size(); ++i) {
    if (counts[i] == 0) continue;
    auto part = synth_mirror(Rng::mix(seed, i), mix[i].kind, counts[i]);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

}  // namespace strew
