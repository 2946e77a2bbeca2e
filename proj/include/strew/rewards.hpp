#pragma once

#include <optional>
#include <string>
#include <vector>

#include "strew/judge.hpp"
#include "strew/types.hpp"

namespace strew {

/// Per-component rewards for one candidate. Components the task's combiner
/// excludes stay absent; `total` is the exact sum of the present ones.
struct RewardBreakdown {
  double format = 0.0;
  std::optional<double> iou;
  std::optional<double> accuracy;
  std::optional<double> recall;
  double total = 0.0;
  bool operator==(const RewardBreakdown&) const = default;
};

struct RewardInputs {
  double format = 0.0;
  std::optional<double> iou;
  std::optional<double> accuracy;
  std::optional<double> recall;
};

// Plain IoU kernels, shared with the eval harness. Degenerate (zero-measure)
// operands: 1 when both operands are identical, else 0.
double interval_iou(const TemporalInterval& a, const TemporalInterval& b);
double box_iou(const BoundingBox& a, const BoundingBox& b);

double reward_format(std::string_view raw, const FormatSpec& spec);
double reward_iou_interval(const std::optional<TemporalInterval>& pred,
                           const TemporalInterval& gt);
double reward_iou_box(const BoundingBox& pred, const BoundingBox& gt);
/// Mean per-frame box IoU; parse failure or length mismatch scores 0.
double reward_tracking(const std::optional<std::vector<BoundingBox>>& pred,
                       const std::vector<BoundingBox>& gt);
double reward_accuracy(const std::optional<ChoiceLetter>& pred, const ChoiceLetter& gt);
/// Event recall of gt against pred, via the judge. Judge failures propagate.
double reward_recall(const std::string& pred_caption, const std::string& gt_caption,
                     Judge& judge);

/// Task combiners: grounding/tracking -> format + iou; choice kinds ->
/// format + accuracy (grounding QA adds iou); captioning -> format + recall.
/// Throws MissingComponent when a required component is absent.
RewardBreakdown combine(TaskKind kind, const RewardInputs& inputs);

/// End-to-end parse + reward + combine for each candidate, order preserved.
/// `judge` is required for captioning tasks.
std::vector<RewardBreakdown> score_group(const TaskInstance& task,
                                         const std::vector<std::string>& candidates,
                                         Judge* judge, bool requires_think = true);

RewardBreakdown score_candidate(const TaskInstance& task, const std::string& candidate,
                                Judge* judge, bool requires_think = true);

}  // namespace strew
