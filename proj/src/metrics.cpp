#include "strew/metrics.hpp"

#include <unordered_map>

#include "strew/dataset.hpp"
#include "strew/parse.hpp"
#include "strew/rewards.hpp"

namespace strew {

double miou(const std::vector<IntervalPair>& pairs) {
  if (pairs.empty()) throw EmptyInput("miou: no pairs");
  double sum = 0.0;
  for (const auto& [pred, gt] : pairs) sum += reward_iou_interval(pred, gt);
  return sum / static_cast<double>(pairs.size());
}

double recall_at(const std::vector<IntervalPair>& pairs, double theta) {
  if (pairs.empty()) throw EmptyInput("recall_at: no pairs");
  int hits = 0;
  for (const auto& [pred, gt] : pairs)
    if (reward_iou_interval(pred, gt) >= theta) ++hits;
  return static_cast<double>(hits) / static_cast<double>(pairs.size());
}

CaptionPrf caption_prf(const std::string& pred, const std::string& gt, Judge& judge) {
  CaptionPrf out;
  out.recall = event_recall(pred, gt, judge).recall;

  std::vector<std::string> pred_events = judge.decompose(pred);
  if (!pred_events.empty()) {
    std::vector<bool> entailed = judge.entails_batch(pred_events, gt);
    size_t hits = 0;
    for (bool e : entailed)
      if (e) ++hits;
    out.precision = static_cast<double>(hits) / static_cast<double>(pred_events.size());
  }
  double denom = out.precision + out.recall;
  out.f1 = denom > 0.0 ? 2.0 * out.precision * out.recall / denom : 0.0;
  return out;
}

namespace {

// per-value threshold sweep shared by grounding and tracking
std::map<double, double> sweep(const std::vector<double>& values,
                               const std::vector<double>& thresholds) {
  std::map<double, double> out;
  for (double theta : thresholds) {
    int hits = 0;
    for (double v : values)
      if (v >= theta) ++hits;
    out[theta] = static_cast<double>(hits) / static_cast<double>(values.size());
  }
  return out;
}

std::optional<TemporalInterval> payload_interval(const AnswerPayload& p) {
  if (auto* v = std::get_if<TemporalInterval>(&p)) return *v;
  return std::nullopt;
}

}  // namespace

MetricReport compute_metrics(TaskKind kind, const std::vector<AnswerPayload>& preds,
                             const std::vector<GroundTruth>& gts, Judge* judge,
                             const std::vector<double>& thresholds) {
  if (gts.empty()) throw EmptyInput("compute_metrics: no samples");
  if (preds.size() != gts.size())
    throw Error("compute_metrics: prediction/gt length mismatch");

  MetricReport report;
  report.kind = kind;
  report.n = static_cast<int>(gts.size());

  switch (kind) {
    case TaskKind::TemporalGrounding: {
      std::vector<double> ious;
      double sum = 0.0;
      for (size_t i = 0; i < gts.size(); ++i) {
        double v = reward_iou_interval(payload_interval(preds[i]), gts[i].interval());
        ious.push_back(v);
        sum += v;
      }
      report.miou = sum / static_cast<double>(ious.size());
      report.recall_at = sweep(ious, thresholds);
      break;
    }
    case TaskKind::ObjectTracking: {
      std::vector<double> overlaps;
      double sum = 0.0;
      for (size_t i = 0; i < gts.size(); ++i) {
        std::optional<std::vector<BoundingBox>> pred;
        if (auto* v = std::get_if<std::vector<BoundingBox>>(&preds[i])) pred = *v;
        double v = reward_tracking(pred, gts[i].boxes());  // per-sequence mean IoU
        overlaps.push_back(v);
        sum += v;
      }
      report.avg_overlap = sum / static_cast<double>(overlaps.size());
      report.recall_at = sweep(overlaps, thresholds);
      break;
    }
    case TaskKind::MultiChoiceQA:
    case TaskKind::QualityAssessment: {
      double sum = 0.0;
      for (size_t i = 0; i < gts.size(); ++i) {
        std::optional<ChoiceLetter> pred;
        if (auto* v = std::get_if<ChoiceLetter>(&preds[i])) pred = *v;
        sum += reward_accuracy(pred, gts[i].choice());
      }
      report.accuracy = sum / static_cast<double>(gts.size());
      break;
    }
    case TaskKind::GroundingQA: {
      std::vector<double> ious;
      double iou_sum = 0.0, acc_sum = 0.0;
      for (size_t i = 0; i < gts.size(); ++i) {
        const auto& gt = gts[i].choice_with_clue();
        double iou = 0.0, acc = 0.0;
        if (auto* v = std::get_if<ChoiceWithClue>(&preds[i])) {
          iou = reward_iou_interval(v->clue, gt.clue);
          acc = reward_accuracy(v->choice, gt.choice);
        }
        ious.push_back(iou);
        iou_sum += iou;
        acc_sum += acc;
      }
      report.miou = iou_sum / static_cast<double>(ious.size());
      report.accuracy = acc_sum / static_cast<double>(gts.size());
      report.recall_at = sweep(ious, thresholds);
      break;
    }
    case TaskKind::Captioning: {
      if (!judge) throw MissingComponent("compute_metrics: captioning requires a judge");
      CaptionPrf mean;
      for (size_t i = 0; i < gts.size(); ++i) {
        std::string pred_text;
        if (auto* v = std::get_if<Caption>(&preds[i])) pred_text = v->text;
        CaptionPrf prf = caption_prf(pred_text, gts[i].caption().text, *judge);
        mean.precision += prf.precision;
        mean.recall += prf.recall;
        mean.f1 += prf.f1;
      }
      double n = static_cast<double>(gts.size());
      report.caption_prf = CaptionPrf{mean.precision / n, mean.recall / n, mean.f1 / n};
      break;
    }
  }
  return report;
}

MetricReport evaluate_run(const std::string& pred_path, const std::string& gt_path,
                          TaskKind kind, Judge* judge) {
  std::vector<TaskInstance> gts = load_task_file(gt_path, kind);
  if (gts.empty()) throw EmptyInput("evaluate_run: ground-truth file is empty");
  std::vector<PredictionRecord> preds = load_prediction_file(pred_path, kind);

  std::unordered_map<std::string, const PredictionRecord*> by_id;
  for (const auto& p : preds) by_id[p.id] = &p;

  std::vector<AnswerPayload> payloads;
  std::vector<GroundTruth> gt_values;
  payloads.reserve(gts.size());
  for (const auto& task : gts) {
    auto it = by_id.find(task.id);
    if (it == by_id.end())
      throw IdMismatch("evaluate_run: no prediction for id '" + task.id + "'");
    const PredictionRecord& rec = *it->second;
    if (const auto* gt = std::get_if<GroundTruth>(&rec.content)) {
      payloads.push_back(std::visit([](const auto& v) { return AnswerPayload(v); }, gt->value));
    } else {
      const std::string& raw = std::get<std::string>(rec.content);
      FormatSpec spec{false, grammar_for(kind)};
      ParseContext ctx{task.n_options(), kind == TaskKind::ObjectTracking
                                             ? static_cast<int>(task.gt.boxes().size())
                                             : 0};
      // tolerate both tagged responses and bare answer payloads
      BlockExtract blocks = extract_blocks(raw, spec);
      std::string answer_text = blocks.answer_raw.value_or(raw);
      ParsedResponse parsed = parse_response(wrap_answer(answer_text, false), spec, ctx);
      payloads.push_back(parsed.payload);
    }
    gt_values.push_back(task.gt);
  }
  return compute_metrics(kind, payloads, gt_values, judge);
}

}  // namespace strew
