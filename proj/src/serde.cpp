#include "strew/serde.hpp"

#include <cmath>
#include <cstdio>

namespace strew {

namespace {

double require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw SchemaError(std::string(what) + " must be finite");
  return v;
}

std::string threshold_key(double theta) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", theta);
  return buf;
}

TemporalInterval interval_from_pair(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw SchemaError(std::string(what) + " must be a [start, end] number pair");
  TemporalInterval out{require_finite(j[0].get<double>(), what),
                       require_finite(j[1].get<double>(), what)};
  if (out.start < 0.0) throw SchemaError(std::string(what) + " start must be >= 0");
  if (out.end < out.start) throw SchemaError(std::string(what) + " must satisfy start <= end");
  return out;
}

BoundingBox box_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4)
    throw SchemaError("box must be [x1, y1, x2, y2]");
  for (const auto& v : j)
    if (!v.is_number()) throw SchemaError("box coordinates must be numbers");
  BoundingBox box{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
                  j[3].get<double>()};
  if (box.x1 < 0 || box.y1 < 0) throw SchemaError("box coordinates must be >= 0");
  if (box.x2 < box.x1 || box.y2 < box.y1)
    throw SchemaError("box must satisfy x1 <= x2 and y1 <= y2");
  return box;
}

ChoiceLetter choice_from_json(const json& j, const char* what) {
  if (!j.is_string()) throw SchemaError(std::string(what) + " must be a string");
  std::string s = j.get<std::string>();
  if (s.size() != 1 || s[0] < 'A' || s[0] > 'E')
    throw SchemaError(std::string(what) + " must be a single letter A-E");
  return ChoiceLetter{s[0]};
}

json box_to_json(const BoundingBox& b) {
  return json::array({b.x1, b.y1, b.x2, b.y2});
}

}  // namespace

json interval_to_json(const TemporalInterval& interval) {
  return json::array({interval.start, interval.end});
}

TemporalInterval interval_from_json(const json& j) {
  return interval_from_pair(j, "interval");
}

json video_to_json(const VideoRef& video) {
  return json{{"uri", video.uri},
              {"duration", video.duration},
              {"fps", video.base_fps},
              {"resolution", json::array({video.width, video.height})}};
}

VideoRef video_from_json(const json& j) {
  if (!j.is_object()) throw SchemaError("video must be an object");
  VideoRef v;
  v.uri = j.value("uri", std::string{});
  if (!j.contains("duration") || !j["duration"].is_number())
    throw SchemaError("video.duration must be a number");
  v.duration = require_finite(j["duration"].get<double>(), "video.duration");
  if (v.duration <= 0.0) throw SchemaError("video.duration must be > 0");
  if (!j.contains("fps") || !j["fps"].is_number())
    throw SchemaError("video.fps must be a number");
  v.base_fps = require_finite(j["fps"].get<double>(), "video.fps");
  if (v.base_fps <= 0.0) throw SchemaError("video.fps must be > 0");
  const auto& res = j.contains("resolution") ? j["resolution"] : json{};
  if (!res.is_array() || res.size() != 2 || !res[0].is_number_integer() ||
      !res[1].is_number_integer())
    throw SchemaError("video.resolution must be [width, height] integers");
  v.width = res[0].get<int>();
  v.height = res[1].get<int>();
  if (v.width <= 0 || v.height <= 0) throw SchemaError("video.resolution must be positive");
  return v;
}

json gt_to_json(const GroundTruth& gt, TaskKind kind) {
  switch (kind) {
    case TaskKind::TemporalGrounding:
      return json{{"interval", interval_to_json(gt.interval())}};
    case TaskKind::ObjectTracking: {
      json boxes = json::array();
      for (const auto& b : gt.boxes()) boxes.push_back(box_to_json(b));
      return json{{"boxes", boxes}};
    }
    case TaskKind::MultiChoiceQA:
      return json{{"choice", std::string(1, gt.choice().letter)}};
    case TaskKind::QualityAssessment:
      return json{{"label", std::string(1, gt.choice().letter)}};
    case TaskKind::GroundingQA: {
      const auto& cwc = gt.choice_with_clue();
      return json{{"choice", std::string(1, cwc.choice.letter)},
                  {"clue", interval_to_json(cwc.clue)}};
    }
    case TaskKind::Captioning:
      return json{{"caption", gt.caption().text}};
  }
  throw SchemaError("unknown task kind");
}

GroundTruth gt_from_json(const json& j, TaskKind kind) {
  if (!j.is_object()) throw SchemaError("gt must be an object");
  GroundTruth gt;
  switch (kind) {
    case TaskKind::TemporalGrounding:
      if (!j.contains("interval")) throw SchemaError("gt.interval required");
      gt.value = interval_from_pair(j["interval"], "gt.interval");
      break;
    case TaskKind::ObjectTracking: {
      if (!j.contains("boxes") || !j["boxes"].is_array() || j["boxes"].empty())
        throw SchemaError("gt.boxes must be a non-empty array");
      std::vector<BoundingBox> boxes;
      for (const auto& b : j["boxes"]) boxes.push_back(box_from_json(b));
      gt.value = std::move(boxes);
      break;
    }
    case TaskKind::MultiChoiceQA:
      if (!j.contains("choice")) throw SchemaError("gt.choice required");
      gt.value = choice_from_json(j["choice"], "gt.choice");
      break;
    case TaskKind::QualityAssessment:
      if (!j.contains("label")) throw SchemaError("gt.label required");
      gt.value = choice_from_json(j["label"], "gt.label");
      break;
    case TaskKind::GroundingQA: {
      if (!j.contains("choice") || !j.contains("clue"))
        throw SchemaError("gt.choice and gt.clue required");
      gt.value = ChoiceWithClue{choice_from_json(j["choice"], "gt.choice"),
                                interval_from_pair(j["clue"], "gt.clue")};
      break;
    }
    case TaskKind::Captioning:
      if (!j.contains("caption") || !j["caption"].is_string())
        throw SchemaError("gt.caption must be a string");
      gt.value = Caption{j["caption"].get<std::string>()};
      break;
  }
  return gt;
}

json task_to_json(const TaskInstance& task) {
  json j{{"id", task.id},
         {"video", video_to_json(task.video)},
         {"kind", to_string(task.kind)},
         {"question", task.question},
         {"gt", gt_to_json(task.gt, task.kind)}};
  if (task.options) j["options"] = *task.options;
  return j;
}

TaskInstance task_from_json(const json& j) {
  if (!j.is_object()) throw SchemaError("task record must be an object");
  TaskInstance task;
  if (!j.contains("id") || !j["id"].is_string() || j["id"].get<std::string>().empty())
    throw SchemaError("id must be a non-empty string");
  task.id = j["id"].get<std::string>();
  if (!j.contains("kind") || !j["kind"].is_string())
    throw SchemaError("kind must be a string");
  task.kind = task_kind_from_string(j["kind"].get<std::string>());
  if (!j.contains("video")) throw SchemaError("video required");
  task.video = video_from_json(j["video"]);
  if (!j.contains("question") || !j["question"].is_string())
    throw SchemaError("question must be a string");
  task.question = j["question"].get<std::string>();
  if (!j.contains("gt")) throw SchemaError("gt required");
  task.gt = gt_from_json(j["gt"], task.kind);
  if (j.contains("options")) {
    if (!j["options"].is_array()) throw SchemaError("options must be an array");
    std::vector<std::string> options;
    for (const auto& o : j["options"]) {
      if (!o.is_string()) throw SchemaError("options must be strings");
      options.push_back(o.get<std::string>());
    }
    task.options = std::move(options);
  }
  // cross-field invariants live in validate_instance (dataset.cpp)
  return task;
}

json breakdown_to_json(const RewardBreakdown& breakdown) {
  json j{{"format", breakdown.format}, {"total", breakdown.total}};
  if (breakdown.iou) j["iou"] = *breakdown.iou;
  if (breakdown.accuracy) j["accuracy"] = *breakdown.accuracy;
  if (breakdown.recall) j["recall"] = *breakdown.recall;
  return j;
}

RewardBreakdown breakdown_from_json(const json& j) {
  RewardBreakdown b;
  b.format = j.at("format").get<double>();
  b.total = j.at("total").get<double>();
  if (j.contains("iou")) b.iou = j["iou"].get<double>();
  if (j.contains("accuracy")) b.accuracy = j["accuracy"].get<double>();
  if (j.contains("recall")) b.recall = j["recall"].get<double>();
  return b;
}

json metric_report_to_json(const MetricReport& report) {
  json j{{"kind", to_string(report.kind)}, {"n", report.n}};
  if (report.miou) j["miou"] = *report.miou;
  if (!report.recall_at.empty()) {
    json r = json::object();
    for (const auto& [theta, value] : report.recall_at) r[threshold_key(theta)] = value;
    j["recall_at"] = r;
  }
  if (report.avg_overlap) j["avg_overlap"] = *report.avg_overlap;
  if (report.accuracy) j["accuracy"] = *report.accuracy;
  if (report.caption_prf)
    j["caption_prf"] = json{{"precision", report.caption_prf->precision},
                            {"recall", report.caption_prf->recall},
                            {"f1", report.caption_prf->f1}};
  return j;
}

json parsed_response_to_json(const ParsedResponse& response) {
  json j{{"format_ok", response.format_ok}, {"answer_present", response.answer_present}};
  if (response.think) j["think"] = *response.think;
  if (response.answer_present) j["answer"] = response.answer_raw;

  if (auto* v = std::get_if<TemporalInterval>(&response.payload))
    j["payload"] = json{{"interval", interval_to_json(*v)}};
  else if (auto* b = std::get_if<std::vector<BoundingBox>>(&response.payload)) {
    json boxes = json::array();
    for (const auto& box : *b) boxes.push_back(box_to_json(box));
    j["payload"] = json{{"boxes", boxes}};
  } else if (auto* c = std::get_if<ChoiceLetter>(&response.payload))
    j["payload"] = json{{"choice", std::string(1, c->letter)}};
  else if (auto* cw = std::get_if<ChoiceWithClue>(&response.payload))
    j["payload"] = json{{"choice", std::string(1, cw->choice.letter)},
                        {"clue", interval_to_json(cw->clue)}};
  else if (auto* cap = std::get_if<Caption>(&response.payload))
    j["payload"] = json{{"caption", cap->text}};
  else
    j["payload"] = json{{"parse_failure", true}};
  return j;
}

json perception_request_to_json(const PerceptionRequest& request) {
  json ranges = json::array();
  for (const auto& r : request.time_ranges) ranges.push_back(interval_to_json(r));
  return json{{"video_uri", request.video.uri},
              {"time_range", ranges},
              {"fps", request.fps},
              {"resolution", json::array({request.width, request.height})},
              {"prompt", request.question}};
}

json clue_session_to_json(const ClueSession& session, const std::string& task_id) {
  json j{{"id", task_id},
         {"first_answer", parsed_response_to_json(session.first_answer)},
         {"fallback", session.fallback},
         {"client_calls", session.client_calls},
         {"final_answer", parsed_response_to_json(session.final_answer)}};
  json clues = json::array();
  for (const auto& c : session.clues) clues.push_back(interval_to_json(c));
  j["clues"] = clues;
  json segments = json::array();
  for (const auto& s : session.segments) segments.push_back(interval_to_json(s));
  j["segments"] = segments;
  if (session.second_request)
    j["second_request"] = perception_request_to_json(*session.second_request);
  return j;
}

json toy_train_config_to_json(const ToyTrainConfig& cfg) {
  return json{
      {"kind", to_string(cfg.kind)},
      {"steps", cfg.steps},
      {"batch_groups", cfg.batch_groups},
      {"n_train", cfg.n_train},
      {"n_eval", cfg.n_eval},
      {"eval_every", cfg.eval_every},
      {"requires_think", cfg.requires_think},
      {"sft_learning_rate", cfg.sft_learning_rate},
      {"grpo",
       {{"group_size", cfg.grpo.group_size},
        {"clip_epsilon", cfg.grpo.clip_epsilon},
        {"kl_coefficient", cfg.grpo.kl_coefficient},
        {"epsilon_sigma", cfg.grpo.epsilon_sigma},
        {"learning_rate", cfg.grpo.learning_rate},
        {"seed", cfg.grpo.seed}}},
      {"env",
       {{"start_bins", cfg.env.start_bins},
        {"length_bins", cfg.env.length_bins},
        {"feature_dim", cfg.env.feature_dim},
        {"n_archetypes", cfg.env.n_archetypes},
        {"temperature", cfg.env.temperature},
        {"jitter", cfg.env.jitter},
        {"signal_scale_in", cfg.env.signal_scale_in},
        {"signal_scale_shift", cfg.env.signal_scale_shift},
        {"signal_noise", cfg.env.signal_noise},
        {"distractor_noise", cfg.env.distractor_noise},
        {"distractor_noise_shift", cfg.env.distractor_noise_shift},
        {"dur_in", json::array({cfg.env.dur_in_lo, cfg.env.dur_in_hi})},
        {"dur_shift", json::array({cfg.env.dur_shift_lo, cfg.env.dur_shift_hi})},
        {"shift_offset_start", cfg.env.shift_offset_start},
        {"shift_offset_length", cfg.env.shift_offset_length},
        {"n_options", cfg.env.n_options}}},
  };
}

json train_report_to_json(const TrainReport& report) {
  json series = json::array();
  for (const auto& s : report.series)
    series.push_back(json{{"step", s.step},
                          {"mean_reward", s.mean_reward},
                          {"mean_kl", s.mean_kl},
                          {"objective", s.objective}});
  json evals = json::array();
  for (const auto& e : report.eval_series)
    evals.push_back(json{{"step", e.step},
                         {"in_score", e.in_score},
                         {"shifted_score", e.shifted_score}});
  return json{{"algo", report.algo},
              {"seed", report.seed},
              {"config", toy_train_config_to_json(report.config)},
              {"series", series},
              {"eval_series", evals},
              {"final_in", metric_report_to_json(report.final_in)},
              {"final_shifted", metric_report_to_json(report.final_shifted)}};
}

}  // namespace strew
