#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "strew/judge.hpp"
#include "strew/types.hpp"

namespace strew {

struct CaptionPrf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool operator==(const CaptionPrf&) const = default;
};

/// Metrics over one prediction/ground-truth run. Fields a task kind does not
/// define stay absent.
struct MetricReport {
  TaskKind kind = TaskKind::TemporalGrounding;
  int n = 0;
  std::optional<double> miou;
  std::map<double, double> recall_at;  // threshold -> fraction with IoU >= threshold
  std::optional<double> avg_overlap;   // tracking, mean per-sequence overlap
  std::optional<double> accuracy;
  std::optional<CaptionPrf> caption_prf;  // macro-averaged
  bool operator==(const MetricReport&) const = default;
};

using IntervalPair = std::pair<std::optional<TemporalInterval>, TemporalInterval>;

double miou(const std::vector<IntervalPair>& pairs);
/// Fraction of pairs with IoU >= theta (inclusive).
double recall_at(const std::vector<IntervalPair>& pairs, double theta);

/// Recall: fraction of gt events entailed by pred (the reward direction);
/// precision: fraction of pred events entailed by gt; f1 harmonic mean,
/// zero when both sides are zero.
CaptionPrf caption_prf(const std::string& pred, const std::string& gt, Judge& judge);

inline const std::vector<double>& default_iou_thresholds() {
  static const std::vector<double> t{0.3, 0.5, 0.7};
  return t;
}

/// Kind-dispatched metrics over aligned payload/gt vectors. `judge` is
/// required for captioning.
MetricReport compute_metrics(TaskKind kind, const std::vector<AnswerPayload>& preds,
                             const std::vector<GroundTruth>& gts, Judge* judge,
                             const std::vector<double>& thresholds = default_iou_thresholds());

/// File-level entry point: loads both JSONL files, joins rows by id and
/// dispatches on kind. Predictions may be {id, answer} records or full task
/// records (their gt payload is then used verbatim).
MetricReport evaluate_run(const std::string& pred_path, const std::string& gt_path,
                          TaskKind kind, Judge* judge);

}  // namespace strew
