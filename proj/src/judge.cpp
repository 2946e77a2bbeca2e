#include "strew/judge.hpp"

#include <httplib.h>

#include <cctype>
#include <chrono>
#include <condition_variable>
#include <json.hpp>
#include <mutex>
#include <thread>
#include <unordered_set>

#include "strew/log.hpp"

namespace strew {

std::vector<bool> Judge::entails_batch(const std::vector<std::string>& events,
                                       const std::string& caption) {
  std::vector<bool> out;
  out.reserve(events.size());
  for (const auto& event : events) out.push_back(entails(event, caption));
  return out;
}

JudgeVerdict event_recall(const std::string& pred, const std::string& gt, Judge& judge) {
  JudgeVerdict verdict;
  verdict.gt_events = judge.decompose(gt);
  if (verdict.gt_events.empty()) {
    log_warn("event_recall: ground-truth caption decomposed into zero events");
    return verdict;
  }
  verdict.entailed = judge.entails_batch(verdict.gt_events, pred);
  size_t hits = 0;
  for (bool e : verdict.entailed)
    if (e) ++hits;
  verdict.recall = static_cast<double>(hits) / static_cast<double>(verdict.gt_events.size());
  return verdict;
}

std::string normalize_event(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char raw : text) {
    unsigned char c = static_cast<unsigned char>(raw);
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out += ' ';
      pending_space = false;
    }
    out += static_cast<char>(std::tolower(c));
  }
  return out;
}

// ---------------------------------------------------------------------------
// OracleJudge
// ---------------------------------------------------------------------------

std::vector<std::string> OracleJudge::decompose(const std::string& caption) {
  std::string_view body = caption;
  size_t start = body.find_first_not_of(" \t\r\n");
  if (start == std::string_view::npos) return {};
  body.remove_prefix(start);
  constexpr std::string_view kPrefix = "events:";
  if (body.size() >= kPrefix.size()) {
    bool has_prefix = true;
    for (size_t i = 0; i < kPrefix.size(); ++i)
      if (std::tolower(static_cast<unsigned char>(body[i])) != kPrefix[i]) {
        has_prefix = false;
        break;
      }
    if (has_prefix) body.remove_prefix(kPrefix.size());
  }

  std::vector<std::string> events;
  std::unordered_set<std::string> seen;
  size_t pos = 0;
  while (pos <= body.size()) {
    size_t semi = body.find(';', pos);
    std::string_view piece =
        body.substr(pos, semi == std::string_view::npos ? body.size() - pos : semi - pos);
    std::string norm = normalize_event(piece);
    if (!norm.empty() && seen.insert(norm).second) events.push_back(std::move(norm));
    if (semi == std::string_view::npos) break;
    pos = semi + 1;
  }
  return events;
}

bool OracleJudge::entails(const std::string& event, const std::string& caption) {
  std::string needle = normalize_event(event);
  if (needle.empty()) return false;
  for (const auto& have : decompose(caption))
    if (have == needle) return true;
  return false;
}

// ---------------------------------------------------------------------------
// RemoteJudge
// ---------------------------------------------------------------------------

const char* const kJudgePromptVersion = "judge-prompts/v1";

const char* const kDecomposePromptTemplate =
    "Decompose the following video caption into its distinct atomic events.\n"
    "Respond with a numbered list only, one event per line, such as:\n"
    "1. first event\n"
    "2. second event\n"
    "Do not add any other text.\n"
    "\n"
    "Caption: {caption}";

const char* const kEntailPromptTemplate =
    "You will judge entailment. For each numbered event below, decide whether "
    "the event is entailed by the caption.\n"
    "Respond with one line per event: the event number, a period, and yes or "
    "no. Do not add any other text.\n"
    "\n"
    "Caption: {caption}\n"
    "\n"
    "Events:\n"
    "{events}";

namespace {

// internal: retried, never escapes RemoteJudge
struct MalformedJudgeReply : Error {
  using Error::Error;
};

std::string substitute(std::string text, std::string_view key, const std::string& value) {
  size_t pos = text.find(key);
  if (pos != std::string::npos) text.replace(pos, key.size(), value);
  return text;
}

// Lines shaped "3. text", "3) text" or "3: text" -> (index, text).
std::vector<std::pair<int, std::string>> numbered_lines(const std::string& content) {
  std::vector<std::pair<int, std::string>> out;
  size_t pos = 0;
  while (pos <= content.size()) {
    size_t eol = content.find('\n', pos);
    std::string_view line(content.data() + pos,
                          (eol == std::string::npos ? content.size() : eol) - pos);
    size_t i = 0;
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    size_t digits = i;
    while (digits < line.size() && std::isdigit(static_cast<unsigned char>(line[digits])))
      ++digits;
    if (digits > i && digits < line.size() &&
        (line[digits] == '.' || line[digits] == ')' || line[digits] == ':')) {
      int index = std::stoi(std::string(line.substr(i, digits - i)));
      std::string_view rest = line.substr(digits + 1);
      size_t b = rest.find_first_not_of(" \t\r");
      size_t e = rest.find_last_not_of(" \t\r");
      if (b != std::string_view::npos)
        out.emplace_back(index, std::string(rest.substr(b, e - b + 1)));
    }
    if (eol == std::string::npos) break;
    pos = eol + 1;
  }
  return out;
}

}  // namespace

struct RemoteJudge::Slots {
  std::mutex mu;
  std::condition_variable cv;
  int available = 0;

  void acquire() {
    std::unique_lock<std::mutex> lock(mu);
    cv.wait(lock, [&] { return available > 0; });
    --available;
  }
  void release() {
    {
      std::lock_guard<std::mutex> lock(mu);
      ++available;
    }
    cv.notify_one();
  }
};

RemoteJudge::RemoteJudge(RemoteJudgeConfig config)
    : config_(std::move(config)), slots_(std::make_unique<Slots>()) {
  slots_->available = std::max(1, config_.max_concurrent);
}

RemoteJudge::~RemoteJudge() = default;

std::string RemoteJudge::chat(const std::string& prompt) {
  nlohmann::json body{
      {"model", config_.model},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
      {"temperature", 0},
  };
  const std::string payload = body.dump();

  slots_->acquire();
  struct Release {
    Slots* s;
    ~Release() { s->release(); }
  } release{slots_.get()};

  httplib::Client client(config_.base_url);
  client.set_connection_timeout(0, config_.timeout_ms * 1000LL);
  client.set_read_timeout(config_.timeout_ms / 1000, (config_.timeout_ms % 1000) * 1000);

  auto res = client.Post(config_.path, payload, "application/json");
  if (!res || res->status != 200)
    throw MalformedJudgeReply("judge endpoint returned " +
                              (res ? std::to_string(res->status) : std::string("no response")));
  try {
    auto j = nlohmann::json::parse(res->body);
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw MalformedJudgeReply(std::string("judge reply not parseable: ") + e.what());
  }
}

std::vector<std::string> RemoteJudge::decompose(const std::string& caption) {
  if (normalize_event(caption).empty()) return {};
  const std::string prompt = substitute(kDecomposePromptTemplate, "{caption}", caption);
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0)
      std::this_thread::sleep_for(
          std::chrono::milliseconds(config_.backoff_base_ms << (attempt - 1)));
    try {
      auto lines = numbered_lines(chat(prompt));
      std::vector<std::string> events;
      std::unordered_set<std::string> seen;
      for (auto& [index, text] : lines) {
        std::string norm = normalize_event(text);
        if (!norm.empty() && seen.insert(norm).second) events.push_back(std::move(norm));
      }
      if (events.empty()) throw MalformedJudgeReply("no numbered events in judge reply");
      return events;
    } catch (const MalformedJudgeReply& e) {
      log_debug(std::string("judge decompose attempt failed: ") + e.what());
    }
  }
  throw JudgeUnavailable("judge decompose failed after " +
                         std::to_string(config_.max_retries + 1) + " attempts");
}

std::vector<bool> RemoteJudge::entails_batch(const std::vector<std::string>& events,
                                             const std::string& caption) {
  if (events.empty()) return {};
  std::string listing;
  for (size_t i = 0; i < events.size(); ++i)
    listing += std::to_string(i + 1) + ". " + events[i] + "\n";
  std::string prompt = substitute(kEntailPromptTemplate, "{caption}", caption);
  prompt = substitute(prompt, "{events}", listing);

  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0)
      std::this_thread::sleep_for(
          std::chrono::milliseconds(config_.backoff_base_ms << (attempt - 1)));
    try {
      auto lines = numbered_lines(chat(prompt));
      std::vector<int> verdicts(events.size(), -1);
      for (auto& [index, text] : lines) {
        if (index < 1 || index > static_cast<int>(events.size())) continue;
        std::string norm = normalize_event(text);
        if (norm.rfind("yes", 0) == 0) verdicts[index - 1] = 1;
        else if (norm.rfind("no", 0) == 0) verdicts[index - 1] = 0;
      }
      std::vector<bool> out(events.size());
      for (size_t i = 0; i < events.size(); ++i) {
        if (verdicts[i] < 0)
          throw MalformedJudgeReply("missing yes/no verdict for event " +
                                    std::to_string(i + 1));
        out[i] = verdicts[i] == 1;
      }
      return out;
    } catch (const MalformedJudgeReply& e) {
      log_debug(std::string("judge entailment attempt failed: ") + e.what());
    }
  }
  throw JudgeUnavailable("judge entailment failed after " +
                         std::to_string(config_.max_retries + 1) + " attempts");
}

bool RemoteJudge::entails(const std::string& event, const std::string& caption) {
  return entails_batch({event}, caption).at(0);
}

}  // namespace strew
