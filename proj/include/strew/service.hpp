#pragma once

#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "strew/config.hpp"
#include "strew/rewards.hpp"
#include "strew/serde.hpp"

namespace strew {

/// One scoring request: an inline task, its sampled candidates, and whether
/// to return group-normalized advantages alongside the breakdowns.
struct ScoreRequest {
  TaskInstance task;
  std::vector<std::string> candidates;
  bool normalize = false;
  bool requires_think = true;
};

struct ScoreResponse {
  std::vector<RewardBreakdown> breakdowns;
  std::optional<std::vector<double>> advantages;
  std::string engine_version;
};

ScoreRequest score_request_from_json(const json& j);
json score_request_to_json(const ScoreRequest& request);
json score_response_to_json(const ScoreResponse& response);

/// Pure function of the request (plus judge and GRPO config): score_group
/// followed, when requested, by group_advantages.
ScoreResponse handle_score(const ScoreRequest& request, Judge& judge,
                           const GrpoConfig& grpo);

/// Stateless HTTP front end: POST /score, GET /healthz. Shared state (config,
/// judge) is read-only after construction, so requests may run concurrently.
class RewardService {
 public:
  explicit RewardService(AppConfig config);
  ~RewardService();

  /// Binds and serves on a background thread; port 0 picks a free port.
  /// Returns the bound port.
  int start(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace strew
