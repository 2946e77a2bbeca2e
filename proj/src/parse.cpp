#include "strew/parse.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace strew {

namespace {

constexpr std::string_view kThinkOpen = "<think>";
constexpr std::string_view kThinkClose = "</think>";
constexpr std::string_view kAnswerOpen = "<answer>";
constexpr std::string_view kAnswerClose = "</answer>";

bool whitespace_only(std::string_view s) {
  return std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

int count_occurrences(std::string_view hay, std::string_view needle) {
  int count = 0;
  size_t pos = 0;
  while ((pos = hay.find(needle, pos)) != std::string_view::npos) {
    ++count;
    pos += needle.size();
  }
  return count;
}

struct BlockSpan {
  size_t begin;       // position of the open tag
  size_t end;         // one past the close tag
  size_t inner_begin;
  size_t inner_end;
};

// A block is recoverable only when the raw text holds exactly one open and
// one close tag, in order. Anything else (duplicates, reversed order) is
// ambiguous and yields nothing.
std::optional<BlockSpan> unique_block(std::string_view raw, std::string_view open,
                                      std::string_view close) {
  if (count_occurrences(raw, open) != 1 || count_occurrences(raw, close) != 1)
    return std::nullopt;
  size_t o = raw.find(open);
  size_t c = raw.find(close);
  if (c < o + open.size()) return std::nullopt;
  return BlockSpan{o, c + close.size(), o + open.size(), c};
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

}  // namespace

BlockExtract extract_blocks(std::string_view raw, const FormatSpec& spec) {
  BlockExtract out;
  auto think = unique_block(raw, kThinkOpen, kThinkClose);
  auto answer = unique_block(raw, kAnswerOpen, kAnswerClose);
  if (think)
    out.think = std::string(raw.substr(think->inner_begin, think->inner_end - think->inner_begin));
  if (answer)
    out.answer_raw =
        std::string(raw.substr(answer->inner_begin, answer->inner_end - answer->inner_begin));

  if (spec.requires_think) {
    out.format_ok = think && answer && think->end <= answer->begin &&
                    whitespace_only(raw.substr(0, think->begin)) &&
                    whitespace_only(raw.substr(think->end, answer->begin - think->end)) &&
                    whitespace_only(raw.substr(answer->end));
  } else {
    out.format_ok = answer && whitespace_only(raw.substr(0, answer->begin)) &&
                    whitespace_only(raw.substr(answer->end));
  }
  return out;
}

std::vector<double> find_nonneg_decimals(std::string_view text) {
  std::vector<double> out;
  size_t i = 0;
  const size_t n = text.size();
  while (i < n) {
    bool starts_number =
        is_digit(text[i]) || (text[i] == '.' && i + 1 < n && is_digit(text[i + 1]));
    if (!starts_number) {
      ++i;
      continue;
    }
    size_t start = i;
    while (i < n && is_digit(text[i])) ++i;
    if (i < n && text[i] == '.' && i + 1 < n && is_digit(text[i + 1])) {
      ++i;
      while (i < n && is_digit(text[i])) ++i;
    }
    double value = 0.0;
    auto res = std::from_chars(text.data() + start, text.data() + i, value);
    if (res.ec == std::errc() && std::isfinite(value)) out.push_back(value);
  }
  return out;
}

std::optional<TemporalInterval> parse_interval(std::string_view answer_raw) {
  auto nums = find_nonneg_decimals(answer_raw);
  if (nums.size() < 2) return std::nullopt;
  double a = nums[0], b = nums[1];
  return TemporalInterval{std::min(a, b), std::max(a, b)};
}

std::optional<std::vector<BoundingBox>> parse_box_sequence(std::string_view answer_raw,
                                                           int n_frames) {
  std::vector<BoundingBox> boxes;
  size_t i = 0;
  const size_t n = answer_raw.size();
  while (i < n) {
    if (answer_raw[i] != '[') {
      ++i;
      continue;
    }
    size_t close = answer_raw.find_first_of("[]", i + 1);
    if (close == std::string_view::npos || answer_raw[close] == '[')
      return std::nullopt;  // unterminated or nested group
    std::string_view inner = answer_raw.substr(i + 1, close - i - 1);
    // exactly four comma-separated non-negative decimals
    std::vector<double> coords;
    size_t field_start = 0;
    bool ok = true;
    for (int field = 0; field < 4 && ok; ++field) {
      size_t comma = field < 3 ? inner.find(',', field_start) : inner.size();
      if (comma == std::string_view::npos) {
        ok = false;
        break;
      }
      auto nums = find_nonneg_decimals(inner.substr(field_start, comma - field_start));
      std::string_view token = inner.substr(field_start, comma - field_start);
      // the field must be a single number with nothing but whitespace around it
      if (nums.size() != 1) {
        ok = false;
        break;
      }
      for (char c : token)
        if (!is_digit(c) && c != '.' && std::isspace(static_cast<unsigned char>(c)) == 0) {
          ok = false;
          break;
        }
      if (!ok) break;
      coords.push_back(nums[0]);
      field_start = comma + 1;
    }
    if (!ok || coords.size() != 4) return std::nullopt;
    BoundingBox box{std::min(coords[0], coords[2]), std::min(coords[1], coords[3]),
                    std::max(coords[0], coords[2]), std::max(coords[1], coords[3])};
    boxes.push_back(box);
    i = close + 1;
  }
  if (static_cast<int>(boxes.size()) != n_frames) return std::nullopt;
  return boxes;
}

std::optional<ChoiceLetter> parse_choice(std::string_view answer_raw, int n_options) {
  auto in_range = [&](char upper) { return upper >= 'A' && upper < 'A' + n_options; };

  // strict: the whole (trimmed) answer is a single letter
  size_t b = answer_raw.find_first_not_of(" \t\r\n");
  size_t e = answer_raw.find_last_not_of(" \t\r\n");
  if (b != std::string_view::npos && e == b) {
    char c = answer_raw[b];
    char upper = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (std::isalpha(static_cast<unsigned char>(c)) && in_range(upper))
      return ChoiceLetter{upper};
  }

  // lenient: first standalone uppercase letter token in range
  for (size_t i = 0; i < answer_raw.size(); ++i) {
    char c = answer_raw[i];
    if (!in_range(c)) continue;
    bool left_ok =
        i == 0 || std::isalnum(static_cast<unsigned char>(answer_raw[i - 1])) == 0;
    bool right_ok = i + 1 == answer_raw.size() ||
                    std::isalnum(static_cast<unsigned char>(answer_raw[i + 1])) == 0;
    if (left_ok && right_ok) return ChoiceLetter{c};
  }
  return std::nullopt;
}

std::optional<ChoiceWithClue> parse_choice_with_clue(std::string_view answer_raw,
                                                     int n_options) {
  auto choice = parse_choice(answer_raw, n_options);
  auto clue = parse_interval(answer_raw);
  if (!choice || !clue) return std::nullopt;
  return ChoiceWithClue{*choice, *clue};
}

ParsedResponse parse_response(std::string_view raw, const FormatSpec& spec,
                              const ParseContext& ctx) {
  ParsedResponse out;
  BlockExtract blocks = extract_blocks(raw, spec);
  out.format_ok = blocks.format_ok;
  out.think = blocks.think;
  out.answer_present = blocks.answer_raw.has_value();
  out.answer_raw = blocks.answer_raw.value_or("");
  out.payload = ParseFailure{};
  if (!out.answer_present) return out;

  switch (spec.grammar) {
    case AnswerGrammar::Interval:
      if (auto v = parse_interval(out.answer_raw)) out.payload = *v;
      break;
    case AnswerGrammar::BoxSequence:
      if (auto v = parse_box_sequence(out.answer_raw, ctx.n_frames)) out.payload = *v;
      break;
    case AnswerGrammar::Choice:
      if (auto v = parse_choice(out.answer_raw, ctx.n_options)) out.payload = *v;
      break;
    case AnswerGrammar::ChoiceWithClue:
      if (auto v = parse_choice_with_clue(out.answer_raw, ctx.n_options)) out.payload = *v;
      break;
    case AnswerGrammar::FreeText:
      out.payload = Caption{out.answer_raw};
      break;
  }
  return out;
}

namespace {

std::string format_fixed3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

}  // namespace

std::string render_interval(const TemporalInterval& interval) {
  return format_fixed3(interval.start) + " to " + format_fixed3(interval.end);
}

std::string render_box_sequence(std::span<const BoundingBox> boxes) {
  std::string out;
  for (size_t i = 0; i < boxes.size(); ++i) {
    if (i > 0) out += ' ';
    out += '[' + format_fixed3(boxes[i].x1) + ',' + format_fixed3(boxes[i].y1) + ',' +
           format_fixed3(boxes[i].x2) + ',' + format_fixed3(boxes[i].y2) + ']';
  }
  return out;
}

std::string render_choice(ChoiceLetter choice) { return std::string(1, choice.letter); }

std::string render_choice_with_clue(const ChoiceWithClue& cwc) {
  return render_choice(cwc.choice) + ", " + render_interval(cwc.clue);
}

std::string render_gt_answer(const TaskInstance& task) {
  switch (task.kind) {
    case TaskKind::TemporalGrounding:
      return render_interval(task.gt.interval());
    case TaskKind::ObjectTracking:
      return render_box_sequence(task.gt.boxes());
    case TaskKind::MultiChoiceQA:
    case TaskKind::QualityAssessment:
      return render_choice(task.gt.choice());
    case TaskKind::GroundingQA:
      return render_choice_with_clue(task.gt.choice_with_clue());
    case TaskKind::Captioning:
      return task.gt.caption().text;
  }
  return {};
}

std::string wrap_answer(const std::string& answer_text, bool with_think,
                        const std::string& think_text) {
  std::string out;
  if (with_think) out += "<think>" + think_text + "</think>";
  out += "<answer>" + answer_text + "</answer>";
  return out;
}

const char* to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::TemporalGrounding: return "temporal_grounding";
    case TaskKind::ObjectTracking: return "object_tracking";
    case TaskKind::MultiChoiceQA: return "multi_choice_qa";
    case TaskKind::GroundingQA: return "grounding_qa";
    case TaskKind::Captioning: return "captioning";
    case TaskKind::QualityAssessment: return "quality_assessment";
  }
  return "unknown";
}

TaskKind task_kind_from_string(const std::string& name) {
  if (name == "temporal_grounding" || name == "grounding") return TaskKind::TemporalGrounding;
  if (name == "object_tracking" || name == "tracking") return TaskKind::ObjectTracking;
  if (name == "multi_choice_qa" || name == "qa") return TaskKind::MultiChoiceQA;
  if (name == "grounding_qa" || name == "gqa") return TaskKind::GroundingQA;
  if (name == "captioning" || name == "caption") return TaskKind::Captioning;
  if (name == "quality_assessment" || name == "quality") return TaskKind::QualityAssessment;
  throw SchemaError("unknown task kind: " + name);
}

AnswerGrammar grammar_for(TaskKind kind) {
  switch (kind) {
    case TaskKind::TemporalGrounding: return AnswerGrammar::Interval;
    case TaskKind::ObjectTracking: return AnswerGrammar::BoxSequence;
    case TaskKind::MultiChoiceQA: return AnswerGrammar::Choice;
    case TaskKind::GroundingQA: return AnswerGrammar::ChoiceWithClue;
    case TaskKind::Captioning: return AnswerGrammar::FreeText;
    case TaskKind::QualityAssessment: return AnswerGrammar::Choice;
  }
  return AnswerGrammar::FreeText;
}

bool is_choice_kind(TaskKind kind) {
  return kind == TaskKind::MultiChoiceQA || kind == TaskKind::GroundingQA ||
         kind == TaskKind::QualityAssessment;
}

}  // namespace strew
