#pragma once

#include <memory>
#include <string>
#include <vector>

#include "strew/types.hpp"

namespace strew {

/// Event decomposition + entailment behind one interface, so the recall
/// reward can run against either the deterministic local oracle or a remote
/// chat-completion endpoint.
class Judge {
 public:
  virtual ~Judge() = default;

  /// Ordered, normalized, de-duplicated event list; empty caption -> empty.
  virtual std::vector<std::string> decompose(const std::string& caption) = 0;

  /// True iff the event is entailed by the (raw) caption.
  virtual bool entails(const std::string& event, const std::string& caption) = 0;

  /// One verdict for a whole event list. Default loops entails(); remote
  /// implementations override to issue a single batched request.
  virtual std::vector<bool> entails_batch(const std::vector<std::string>& events,
                                          const std::string& caption);
};

struct JudgeVerdict {
  std::vector<std::string> gt_events;
  std::vector<bool> entailed;
  double recall = 0.0;
};

/// Decomposes gt into events and asks the judge, per event, whether pred
/// entails it. An empty gt event list yields recall 0 with a warning.
JudgeVerdict event_recall(const std::string& pred, const std::string& gt, Judge& judge);

/// Lowercase, trim, collapse whitespace runs.
std::string normalize_event(std::string_view text);

/// Deterministic judge over the synthetic caption format
/// "events: e1; e2; ...". Decompose splits on ';' and normalizes; entails is
/// exact membership among the caption's normalized events.
class OracleJudge : public Judge {
 public:
  std::vector<std::string> decompose(const std::string& caption) override;
  bool entails(const std::string& event, const std::string& caption) override;
};

struct RemoteJudgeConfig {
  std::string base_url = "http://127.0.0.1:8000";
  std::string path = "/v1/chat/completions";
  std::string model = "judge-llm";
  int max_retries = 2;       // extra attempts after the first
  int timeout_ms = 30000;
  int backoff_base_ms = 100;
  int max_concurrent = 4;    // outstanding HTTP requests
};

/// LLM judge speaking the chat-completion JSON wire format. Prompt templates
/// are fixed, versioned strings (see docs/judge_prompts.md). Unparseable or
/// failed replies are retried with exponential backoff, then surface as
/// JudgeUnavailable.
class RemoteJudge : public Judge {
 public:
  explicit RemoteJudge(RemoteJudgeConfig config);
  ~RemoteJudge() override;

  std::vector<std::string> decompose(const std::string& caption) override;
  bool entails(const std::string& event, const std::string& caption) override;
  std::vector<bool> entails_batch(const std::vector<std::string>& events,
                                  const std::string& caption) override;

 private:
  std::string chat(const std::string& prompt);

  RemoteJudgeConfig config_;
  struct Slots;
  std::unique_ptr<Slots> slots_;
};

/// Versioned prompt templates ("{caption}", "{events}" placeholders).
extern const char* const kJudgePromptVersion;
extern const char* const kDecomposePromptTemplate;
extern const char* const kEntailPromptTemplate;

}  // namespace strew
