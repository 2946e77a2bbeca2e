#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace strew {

// ---------------------------------------------------------------------------
// Task taxonomy
// ---------------------------------------------------------------------------

enum class TaskKind {
  TemporalGrounding,
  ObjectTracking,
  MultiChoiceQA,
  GroundingQA,
  Captioning,
  QualityAssessment,
};

enum class AnswerGrammar {
  Interval,
  BoxSequence,
  Choice,
  ChoiceWithClue,
  FreeText,
};

/// Output template expected from the model: an optional <think> block
/// followed by one <answer> block whose payload follows `grammar`.
struct FormatSpec {
  bool requires_think = true;
  AnswerGrammar grammar = AnswerGrammar::FreeText;
};

const char* to_string(TaskKind kind);
TaskKind task_kind_from_string(const std::string& name);
AnswerGrammar grammar_for(TaskKind kind);

// ---------------------------------------------------------------------------
// Answer payloads
// ---------------------------------------------------------------------------

struct TemporalInterval {
  double start = 0.0;  // seconds
  double end = 0.0;    // seconds, start <= end
  double length() const { return end - start; }
  bool operator==(const TemporalInterval&) const = default;
};

struct BoundingBox {
  double x1 = 0.0, y1 = 0.0, x2 = 0.0, y2 = 0.0;  // pixels, x1<=x2, y1<=y2
  double area() const { return (x2 - x1) * (y2 - y1); }
  bool operator==(const BoundingBox&) const = default;
};

struct ChoiceLetter {
  char letter = 'A';  // 'A'..'E'
  int index() const { return letter - 'A'; }
  bool operator==(const ChoiceLetter&) const = default;
};

struct ChoiceWithClue {
  ChoiceLetter choice;
  TemporalInterval clue;
  bool operator==(const ChoiceWithClue&) const = default;
};

struct Caption {
  std::string text;
  bool operator==(const Caption&) const = default;
};

/// Marker for an answer that does not satisfy its grammar. Scoring maps it
/// to a zero component reward rather than an error.
struct ParseFailure {
  bool operator==(const ParseFailure&) const = default;
};

using AnswerPayload = std::variant<ParseFailure, TemporalInterval,
                                   std::vector<BoundingBox>, ChoiceLetter,
                                   ChoiceWithClue, Caption>;

struct ParsedResponse {
  bool format_ok = false;
  std::optional<std::string> think;
  bool answer_present = false;
  std::string answer_raw;  // inner text of the answer block, "" when absent
  AnswerPayload payload = ParseFailure{};
};

inline bool is_failure(const AnswerPayload& p) {
  return std::holds_alternative<ParseFailure>(p);
}

// ---------------------------------------------------------------------------
// Dataset records
// ---------------------------------------------------------------------------

struct VideoRef {
  std::string uri;
  double duration = 0.0;  // seconds, > 0
  double base_fps = 0.0;  // > 0
  int width = 0;          // pixels, > 0
  int height = 0;
  bool operator==(const VideoRef&) const = default;
};

/// Supervision for one task instance. The active alternative must match the
/// instance's TaskKind; MultiChoiceQA and QualityAssessment both carry a
/// ChoiceLetter.
struct GroundTruth {
  std::variant<TemporalInterval, std::vector<BoundingBox>, ChoiceLetter,
               ChoiceWithClue, Caption>
      value;

  const TemporalInterval& interval() const { return std::get<TemporalInterval>(value); }
  const std::vector<BoundingBox>& boxes() const { return std::get<std::vector<BoundingBox>>(value); }
  const ChoiceLetter& choice() const { return std::get<ChoiceLetter>(value); }
  const ChoiceWithClue& choice_with_clue() const { return std::get<ChoiceWithClue>(value); }
  const Caption& caption() const { return std::get<Caption>(value); }
  bool operator==(const GroundTruth&) const = default;
};

struct TaskInstance {
  std::string id;
  VideoRef video;
  std::string question;
  TaskKind kind = TaskKind::TemporalGrounding;
  GroundTruth gt;
  std::optional<std::vector<std::string>> options;

  int n_options() const { return options ? static_cast<int>(options->size()) : 0; }
  bool operator==(const TaskInstance&) const = default;
};

/// True for kinds whose instances carry an options list.
bool is_choice_kind(TaskKind kind);

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SchemaError : Error {
  int line;  // 0 when not tied to a file line
  SchemaError(int line_no, const std::string& reason)
      : Error(line_no > 0 ? "line " + std::to_string(line_no) + ": " + reason : reason),
        line(line_no) {}
  explicit SchemaError(const std::string& reason) : SchemaError(0, reason) {}
};

struct IoError : Error {
  using Error::Error;
};

struct IdMismatch : Error {
  using Error::Error;
};

struct EmptyInput : Error {
  using Error::Error;
};

struct MissingComponent : Error {
  using Error::Error;
};

struct JudgeUnavailable : Error {
  using Error::Error;
};

struct ClientError : Error {
  std::string phase;
  ClientError(std::string phase_tag, const std::string& reason)
      : Error("[" + phase_tag + "] " + reason), phase(std::move(phase_tag)) {}
};

struct BudgetInfeasible : Error {
  using Error::Error;
};

struct NonFiniteGradient : Error {
  using Error::Error;
};

}  // namespace strew
