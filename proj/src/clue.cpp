#include "strew/clue.hpp"

#include <httplib.h>

#include <algorithm>
#include <cmath>
#include <fstream>

#include "strew/serde.hpp"

namespace strew {

std::vector<TemporalInterval> extract_temporal_clues(const ParsedResponse& first) {
  if (auto* cwc = std::get_if<ChoiceWithClue>(&first.payload)) return {cwc->clue};
  std::vector<double> nums = find_nonneg_decimals(first.answer_raw);
  std::vector<TemporalInterval> clues;
  for (size_t i = 0; i + 1 < nums.size(); i += 2)
    clues.push_back({std::min(nums[i], nums[i + 1]), std::max(nums[i], nums[i + 1])});
  return clues;
}

std::vector<TemporalInterval> select_segments(const VideoRef& video,
                                              const std::vector<TemporalInterval>& clues,
                                              double padding) {
  std::vector<TemporalInterval> expanded;
  expanded.reserve(clues.size());
  for (const auto& clue : clues)
    expanded.push_back({std::max(0.0, clue.start - padding),
                        std::min(video.duration, clue.end + padding)});
  std::sort(expanded.begin(), expanded.end(),
            [](const TemporalInterval& a, const TemporalInterval& b) {
              return a.start < b.start || (a.start == b.start && a.end < b.end);
            });
  std::vector<TemporalInterval> merged;
  for (const auto& seg : expanded) {
    if (!merged.empty() && seg.start <= merged.back().end)
      merged.back().end = std::max(merged.back().end, seg.end);
    else
      merged.push_back(seg);
  }
  return merged;
}

PerceptionRequest upsample_request(const VideoRef& video,
                                   const std::vector<TemporalInterval>& segments,
                                   double delta_res, double delta_fps,
                                   const std::string& question, double budget,
                                   const FormatSpec& format) {
  if (segments.empty()) throw Error("upsample_request: no segments");
  if (delta_res < 1.0 || delta_fps < 1.0)
    throw Error("upsample_request: boost factors must be >= 1");

  double total_len = 0.0;
  for (const auto& seg : segments) total_len += seg.length();
  const double base_cost = total_len * video.base_fps * video.width * video.height;
  if (base_cost > budget)
    throw BudgetInfeasible("upsample_request: base sampling already exceeds the budget");

  // cost scales linearly in the fps factor and quadratically in the
  // resolution factor; the fps boost is kept and resolution capped first
  double fps_factor = delta_fps;
  double res_factor = delta_res;
  if (base_cost * fps_factor * res_factor * res_factor > budget) {
    res_factor = std::min(res_factor, std::sqrt(budget / (base_cost * fps_factor)));
    if (res_factor < 1.0) {
      res_factor = 1.0;
      fps_factor = std::min(fps_factor, budget / base_cost);
    }
  }

  PerceptionRequest req;
  req.video = video;
  req.time_ranges = segments;
  req.fps = video.base_fps * fps_factor;
  req.width = static_cast<int>(std::floor(video.width * res_factor));
  req.height = static_cast<int>(std::floor(video.height * res_factor));
  req.question = question;
  req.format = format;

  double actual = total_len * req.fps * req.width * req.height;
  if (actual > budget) {  // float residue from the cap arithmetic
    req.fps *= budget / actual * (1.0 - 1e-12);
    actual = total_len * req.fps * req.width * req.height;
  }
  return req;
}

ClueSession run_clue_perception(ModelClient& client, const VideoRef& video,
                                const std::string& question, const ClueConfig& cfg) {
  ClueSession session;
  ParseContext ctx{cfg.n_options, 0};

  PerceptionRequest first;
  first.video = video;
  first.time_ranges = {{0.0, video.duration}};
  first.fps = video.base_fps;
  first.width = video.width;
  first.height = video.height;
  first.question = question;
  first.format = cfg.format;

  try {
    session.first_raw = client.answer(first);
  } catch (const std::exception& e) {
    throw ClientError("first_pass", e.what());
  }
  session.client_calls = 1;
  session.first_answer = parse_response(session.first_raw, cfg.format, ctx);
  session.clues = extract_temporal_clues(session.first_answer);

  if (session.clues.empty()) {
    session.fallback = true;
    session.final_raw = session.first_raw;
    session.final_answer = session.first_answer;
    return session;
  }

  session.segments = select_segments(video, session.clues, cfg.padding);
  session.second_request = upsample_request(video, session.segments, cfg.delta_res,
                                            cfg.delta_fps, question, cfg.pixel_budget,
                                            cfg.format);
  try {
    session.final_raw = client.answer(*session.second_request);
  } catch (const std::exception& e) {
    throw ClientError("second_pass", e.what());
  }
  session.client_calls = 2;
  session.final_answer = parse_response(session.final_raw, cfg.format, ctx);
  return session;
}

// ---------------------------------------------------------------------------
// Clients
// ---------------------------------------------------------------------------

std::unique_ptr<ScriptedModelClient> ScriptedModelClient::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open script " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("script file: ") + e.what());
  }
  if (!j.is_object() || !j.contains("responses") || !j["responses"].is_object())
    throw SchemaError("script file must hold a 'responses' object");
  auto client = std::make_unique<ScriptedModelClient>();
  for (const auto& [question, responses] : j["responses"].items()) {
    if (!responses.is_array()) throw SchemaError("script responses must be arrays");
    std::vector<std::string> list;
    for (const auto& r : responses) list.push_back(r.get<std::string>());
    client->add(question, std::move(list));
  }
  return client;
}

void ScriptedModelClient::add(const std::string& question,
                              std::vector<std::string> responses) {
  responses_[question] = std::move(responses);
}

std::string ScriptedModelClient::answer(const PerceptionRequest& request) {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = responses_.find(request.question);
  if (it == responses_.end() || it->second.empty())
    throw Error("scripted client: no response for question '" + request.question + "'");
  size_t index = cursor_[request.question]++;
  return it->second[std::min(index, it->second.size() - 1)];
}

HttpModelClient::HttpModelClient(std::string base_url, std::string path, int timeout_ms)
    : base_url_(std::move(base_url)), path_(std::move(path)), timeout_ms_(timeout_ms) {}

std::string HttpModelClient::answer(const PerceptionRequest& request) {
  httplib::Client client(base_url_);
  client.set_read_timeout(timeout_ms_ / 1000, (timeout_ms_ % 1000) * 1000);
  auto res = client.Post(path_, perception_request_to_json(request).dump(),
                         "application/json");
  if (!res || res->status != 200)
    throw Error("model endpoint returned " +
                (res ? std::to_string(res->status) : std::string("no response")));
  try {
    return json::parse(res->body).at("text").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(std::string("model reply not parseable: ") + e.what());
  }
}

}  // namespace strew
