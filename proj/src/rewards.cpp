#include "strew/rewards.hpp"

#include <algorithm>

#include "strew/parse.hpp"

namespace strew {

double interval_iou(const TemporalInterval& a, const TemporalInterval& b) {
  double inter = std::max(0.0, std::min(a.end, b.end) - std::max(a.start, b.start));
  double uni = a.length() + b.length() - inter;
  if (uni <= 0.0) return a == b ? 1.0 : 0.0;  // both zero-length
  return inter / uni;
}

double box_iou(const BoundingBox& a, const BoundingBox& b) {
  double iw = std::max(0.0, std::min(a.x2, b.x2) - std::max(a.x1, b.x1));
  double ih = std::max(0.0, std::min(a.y2, b.y2) - std::max(a.y1, b.y1));
  double inter = iw * ih;
  double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return a == b ? 1.0 : 0.0;
  return inter / uni;
}

double reward_format(std::string_view raw, const FormatSpec& spec) {
  return extract_blocks(raw, spec).format_ok ? 1.0 : 0.0;
}

double reward_iou_interval(const std::optional<TemporalInterval>& pred,
                           const TemporalInterval& gt) {
  return pred ? interval_iou(*pred, gt) : 0.0;
}

double reward_iou_box(const BoundingBox& pred, const BoundingBox& gt) {
  return box_iou(pred, gt);
}

double reward_tracking(const std::optional<std::vector<BoundingBox>>& pred,
                       const std::vector<BoundingBox>& gt) {
  if (!pred || pred->size() != gt.size() || gt.empty()) return 0.0;
  double sum = 0.0;
  for (size_t i = 0; i < gt.size(); ++i) sum += box_iou((*pred)[i], gt[i]);
  return sum / static_cast<double>(gt.size());
}

double reward_accuracy(const std::optional<ChoiceLetter>& pred, const ChoiceLetter& gt) {
  return pred && *pred == gt ? 1.0 : 0.0;
}

double reward_recall(const std::string& pred_caption, const std::string& gt_caption,
                     Judge& judge) {
  return event_recall(pred_caption, gt_caption, judge).recall;
}

RewardBreakdown combine(TaskKind kind, const RewardInputs& inputs) {
  auto require = [&](const std::optional<double>& component, const char* name) {
    if (!component)
      throw MissingComponent(std::string("combine: task ") + to_string(kind) +
                             " requires component '" + name + "'");
    return *component;
  };

  RewardBreakdown out;
  out.format = inputs.format;
  switch (kind) {
    case TaskKind::TemporalGrounding:
    case TaskKind::ObjectTracking:
      out.iou = require(inputs.iou, "iou");
      out.total = out.format + *out.iou;
      break;
    case TaskKind::MultiChoiceQA:
    case TaskKind::QualityAssessment:
      out.accuracy = require(inputs.accuracy, "accuracy");
      out.total = out.format + *out.accuracy;
      break;
    case TaskKind::GroundingQA:
      out.iou = require(inputs.iou, "iou");
      out.accuracy = require(inputs.accuracy, "accuracy");
      out.total = out.format + *out.iou + *out.accuracy;
      break;
    case TaskKind::Captioning:
      out.recall = require(inputs.recall, "recall");
      out.total = out.format + *out.recall;
      break;
  }
  return out;
}

RewardBreakdown score_candidate(const TaskInstance& task, const std::string& candidate,
                                Judge* judge, bool requires_think) {
  FormatSpec spec{requires_think, grammar_for(task.kind)};
  ParseContext ctx;
  ctx.n_options = task.n_options();
  if (task.kind == TaskKind::ObjectTracking)
    ctx.n_frames = static_cast<int>(task.gt.boxes().size());

  ParsedResponse parsed = parse_response(candidate, spec, ctx);
  RewardInputs inputs;
  inputs.format = parsed.format_ok ? 1.0 : 0.0;

  switch (task.kind) {
    case TaskKind::TemporalGrounding: {
      std::optional<TemporalInterval> pred;
      if (auto* v = std::get_if<TemporalInterval>(&parsed.payload)) pred = *v;
      inputs.iou = reward_iou_interval(pred, task.gt.interval());
      break;
    }
    case TaskKind::ObjectTracking: {
      std::optional<std::vector<BoundingBox>> pred;
      if (auto* v = std::get_if<std::vector<BoundingBox>>(&parsed.payload)) pred = *v;
      inputs.iou = reward_tracking(pred, task.gt.boxes());
      break;
    }
    case TaskKind::MultiChoiceQA:
    case TaskKind::QualityAssessment: {
      std::optional<ChoiceLetter> pred;
      if (auto* v = std::get_if<ChoiceLetter>(&parsed.payload)) pred = *v;
      inputs.accuracy = reward_accuracy(pred, task.gt.choice());
      break;
    }
    case TaskKind::GroundingQA: {
      const ChoiceWithClue& gt = task.gt.choice_with_clue();
      if (auto* v = std::get_if<ChoiceWithClue>(&parsed.payload)) {
        inputs.iou = reward_iou_interval(v->clue, gt.clue);
        inputs.accuracy = reward_accuracy(v->choice, gt.choice);
      } else {
        inputs.iou = 0.0;
        inputs.accuracy = 0.0;
      }
      break;
    }
    case TaskKind::Captioning: {
      if (auto* v = std::get_if<Caption>(&parsed.payload)) {
        if (!judge) throw MissingComponent("score: captioning task requires a judge");
        inputs.recall = reward_recall(v->text, task.gt.caption().text, *judge);
      } else {
        inputs.recall = 0.0;  // no answer block, nothing to judge
      }
      break;
    }
  }
  return combine(task.kind, inputs);
}

std::vector<RewardBreakdown> score_group(const TaskInstance& task,
                                         const std::vector<std::string>& candidates,
                                         Judge* judge, bool requires_think) {
  if (candidates.empty()) throw EmptyInput("score_group: candidate list is empty");
  if (task.kind == TaskKind::Captioning && !judge)
    throw MissingComponent("score_group: captioning task requires a judge");
  std::vector<RewardBreakdown> out;
  out.reserve(candidates.size());
  for (const auto& candidate : candidates)
    out.push_back(score_candidate(task, candidate, judge, requires_think));
  return out;
}

}  // namespace strew
