#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "strew/types.hpp"

namespace strew {

/// Result of tag extraction. `format_ok` is the strict template check;
/// think/answer are extracted leniently (present whenever the raw text
/// contains exactly one matching open/close tag pair) so a malformed
/// response can still be scored on its payload.
struct BlockExtract {
  bool format_ok = false;
  std::optional<std::string> think;
  std::optional<std::string> answer_raw;
};

/// Strict template: when spec.requires_think, exactly one <think>...</think>
/// followed by exactly one <answer>...</answer> with only whitespace outside
/// the two blocks; otherwise exactly one answer block with only whitespace
/// around it.
BlockExtract extract_blocks(std::string_view raw, const FormatSpec& spec);

// Payload grammars (documented as EBNF in docs/formats.md). Each parser
// accepts the canonical form plus a lenient numeric fallback; nullopt is the
// ParseFailure case.

/// interval := number ws "to" ws number.  Fallback: first two non-negative
/// decimals in reading order, swapped if needed so start <= end.
std::optional<TemporalInterval> parse_interval(std::string_view answer_raw);

/// boxes := group+ with group := "[" n "," n "," n "," n "]".  Exactly
/// `n_frames` groups required; corners are normalized per axis.
std::optional<std::vector<BoundingBox>> parse_box_sequence(std::string_view answer_raw,
                                                           int n_frames);

/// choice := letter in A..(A + n_options - 1).  Fallback: first standalone
/// uppercase letter token in range.
std::optional<ChoiceLetter> parse_choice(std::string_view answer_raw, int n_options);

/// Both a choice and a clue interval read from the same answer text.
std::optional<ChoiceWithClue> parse_choice_with_clue(std::string_view answer_raw,
                                                     int n_options);

struct ParseContext {
  int n_options = 0;
  int n_frames = 0;
};

/// Full pipeline: tag extraction plus payload parse per spec.grammar.
ParsedResponse parse_response(std::string_view raw, const FormatSpec& spec,
                              const ParseContext& ctx = {});

/// All non-negative decimal literals in reading order (no sign, no exponent).
std::vector<double> find_nonneg_decimals(std::string_view text);

// Canonical renderers (inverse of the strict grammars, 3 decimal places).
std::string render_interval(const TemporalInterval& interval);
std::string render_box_sequence(std::span<const BoundingBox> boxes);
std::string render_choice(ChoiceLetter choice);
std::string render_choice_with_clue(const ChoiceWithClue& cwc);
std::string render_gt_answer(const TaskInstance& task);

/// Wraps answer text in the tag template, with a placeholder think block
/// when requested.
std::string wrap_answer(const std::string& answer_text, bool with_think,
                        const std::string& think_text = "...");

}  // namespace strew
