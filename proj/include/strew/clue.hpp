#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "strew/parse.hpp"
#include "strew/types.hpp"

namespace strew {

/// One sampling request sent to a model endpoint. The pipeline never touches
/// pixels; it describes which segments to sample and how densely.
struct PerceptionRequest {
  VideoRef video;
  std::vector<TemporalInterval> time_ranges;
  double fps = 0.0;
  int width = 0;
  int height = 0;
  std::string question;
  FormatSpec format;
};

class ModelClient {
 public:
  virtual ~ModelClient() = default;
  virtual std::string answer(const PerceptionRequest& request) = 0;
};

struct ClueConfig {
  double delta_res = 2.0;   // resolution boost factor, >= 1
  double delta_fps = 2.0;   // frame-rate boost factor, >= 1
  double padding = 2.0;     // seconds of slack around each clue
  double pixel_budget = 1e12;  // max sum of segment_len * fps * w * h
  FormatSpec format{false, AnswerGrammar::ChoiceWithClue};
  int n_options = 4;
};

/// Full record of one two-pass run.
struct ClueSession {
  std::string first_raw;
  ParsedResponse first_answer;
  std::vector<TemporalInterval> clues;
  std::vector<TemporalInterval> segments;
  std::optional<PerceptionRequest> second_request;
  std::string final_raw;
  ParsedResponse final_answer;
  bool fallback = false;  // no usable clue: final answer is the first answer
  int client_calls = 0;
};

/// Clue intervals from a first-pass answer: the clue field for
/// choice-with-clue payloads, otherwise consecutive pairs of the decimals
/// found in the answer text. Empty when nothing is usable.
std::vector<TemporalInterval> extract_temporal_clues(const ParsedResponse& first);

/// Pads each clue by `padding`, clamps to [0, duration], merges overlaps.
/// Output is sorted and pairwise disjoint and covers every clue.
std::vector<TemporalInterval> select_segments(const VideoRef& video,
                                              const std::vector<TemporalInterval>& clues,
                                              double padding);

/// Applies the boost factors then caps them (resolution first, then fps) so
/// the total frame-pixel cost stays within budget. Throws BudgetInfeasible
/// when even base settings exceed it.
PerceptionRequest upsample_request(const VideoRef& video,
                                   const std::vector<TemporalInterval>& segments,
                                   double delta_res, double delta_fps,
                                   const std::string& question, double budget,
                                   const FormatSpec& format);

/// The two-pass loop: answer, extract clues, re-perceive the clued segments
/// at boosted fps/resolution, answer again. Falls back to the first answer
/// when no clue is extractable.
ClueSession run_clue_perception(ModelClient& client, const VideoRef& video,
                                const std::string& question, const ClueConfig& cfg);

/// Test/offline double: canned responses per question, consumed in call
/// order. Loadable from a JSON script file {"responses": {question: [..]}}.
class ScriptedModelClient : public ModelClient {
 public:
  static std::unique_ptr<ScriptedModelClient> from_file(const std::string& path);
  void add(const std::string& question, std::vector<std::string> responses);
  std::string answer(const PerceptionRequest& request) override;

 private:
  std::map<std::string, std::vector<std::string>> responses_;
  std::map<std::string, size_t> cursor_;
  std::mutex mu_;
};

/// HTTP client for the wire format
/// {video_uri, time_range, fps, resolution, prompt} -> {text}.
class HttpModelClient : public ModelClient {
 public:
  explicit HttpModelClient(std::string base_url, std::string path = "/answer",
                           int timeout_ms = 60000);
  std::string answer(const PerceptionRequest& request) override;

 private:
  std::string base_url_;
  std::string path_;
  int timeout_ms_;
};

}  // namespace strew
