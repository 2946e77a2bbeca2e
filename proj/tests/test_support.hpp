#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "strew/rng.hpp"
#include "strew/types.hpp"

// Independent oracles and generators shared by the unit and acceptance
// suites. These deliberately avoid the library's IoU kernels: intervals are
// checked by counting 1 ms cells, boxes by counting unit pixel cells, so the
// random inputs are generated on those grids.
namespace testsup {

inline double oracle_interval_iou_cells(const strew::TemporalInterval& a,
                                        const strew::TemporalInterval& b) {
  long long a0 = std::llround(a.start * 1000.0), a1 = std::llround(a.end * 1000.0);
  long long b0 = std::llround(b.start * 1000.0), b1 = std::llround(b.end * 1000.0);
  long long lo = std::min(a0, b0), hi = std::max(a1, b1);
  long long inter = 0, uni = 0;
  for (long long t = lo; t < hi; ++t) {
    bool in_a = t >= a0 && t < a1;
    bool in_b = t >= b0 && t < b1;
    if (in_a && in_b) ++inter;
    if (in_a || in_b) ++uni;
  }
  if (uni == 0) return (a0 == b0 && a1 == b1) ? 1.0 : 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

inline double oracle_box_iou_cells(const strew::BoundingBox& a, const strew::BoundingBox& b) {
  long long ax1 = std::llround(a.x1), ay1 = std::llround(a.y1);
  long long ax2 = std::llround(a.x2), ay2 = std::llround(a.y2);
  long long bx1 = std::llround(b.x1), by1 = std::llround(b.y1);
  long long bx2 = std::llround(b.x2), by2 = std::llround(b.y2);
  long long inter = 0, uni = 0;
  for (long long y = std::min(ay1, by1); y < std::max(ay2, by2); ++y)
    for (long long x = std::min(ax1, bx1); x < std::max(ax2, bx2); ++x) {
      bool in_a = x >= ax1 && x < ax2 && y >= ay1 && y < ay2;
      bool in_b = x >= bx1 && x < bx2 && y >= by1 && y < by2;
      if (in_a && in_b) ++inter;
      if (in_a || in_b) ++uni;
    }
  if (uni == 0)
    return (ax1 == bx1 && ay1 == by1 && ax2 == bx2 && ay2 == by2) ? 1.0 : 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

/// Random interval with millisecond endpoints in [0, 60s].
inline strew::TemporalInterval random_ms_interval(strew::Rng& rng, bool allow_degenerate = true) {
  long long a = rng.uniform_int(0, 60000);
  long long b = allow_degenerate && rng.uniform() < 0.02 ? a : rng.uniform_int(0, 60000);
  if (a > b) std::swap(a, b);
  return {a / 1000.0, b / 1000.0};
}

/// Random box with integer corners in [0, 120]^2.
inline strew::BoundingBox random_int_box(strew::Rng& rng) {
  int x1 = rng.uniform_int(0, 120), x2 = rng.uniform_int(0, 120);
  int y1 = rng.uniform_int(0, 120), y2 = rng.uniform_int(0, 120);
  if (x1 > x2) std::swap(x1, x2);
  if (y1 > y2) std::swap(y1, y2);
  return {static_cast<double>(x1), static_cast<double>(y1), static_cast<double>(x2),
          static_cast<double>(y2)};
}

inline strew::TaskInstance make_grounding_task(const std::string& id,
                                               strew::TemporalInterval gt,
                                               double duration = 60.0) {
  strew::TaskInstance task;
  task.id = id;
  task.kind = strew::TaskKind::TemporalGrounding;
  task.video = {"synth://video/" + id, duration, 1.0, 320, 240};
  task.question = "When does the event occur?";
  task.gt.value = gt;
  return task;
}

inline strew::TaskInstance make_caption_task(const std::string& id, const std::string& gt) {
  strew::TaskInstance task;
  task.id = id;
  task.kind = strew::TaskKind::Captioning;
  task.video = {"synth://video/" + id, 30.0, 1.0, 320, 240};
  task.question = "Describe the video as an event list.";
  task.gt.value = strew::Caption{gt};
  return task;
}

}  // namespace testsup
