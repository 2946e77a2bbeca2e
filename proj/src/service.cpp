#include "strew/service.hpp"

#include <httplib.h>

#include "strew/dataset.hpp"
#include "strew/log.hpp"
#include "strew/version.hpp"

namespace strew {

ScoreRequest score_request_from_json(const json& j) {
  if (!j.is_object()) throw SchemaError("request body must be a JSON object");
  if (!j.contains("task")) throw SchemaError("request.task required");
  ScoreRequest req;
  req.task = task_from_json(j["task"]);
  validate_instance(req.task);
  if (!j.contains("candidates") || !j["candidates"].is_array() || j["candidates"].empty())
    throw SchemaError("request.candidates must be a non-empty array");
  for (const auto& c : j["candidates"]) {
    if (!c.is_string()) throw SchemaError("candidates must be strings");
    req.candidates.push_back(c.get<std::string>());
  }
  req.normalize = j.value("normalize", false);
  req.requires_think = j.value("requires_think", true);
  if (req.normalize && req.candidates.size() < 2)
    throw SchemaError("normalize requires at least 2 candidates");
  return req;
}

json score_request_to_json(const ScoreRequest& request) {
  json j{{"task", task_to_json(request.task)},
         {"candidates", request.candidates},
         {"normalize", request.normalize},
         {"requires_think", request.requires_think}};
  return j;
}

json score_response_to_json(const ScoreResponse& response) {
  json breakdowns = json::array();
  for (const auto& b : response.breakdowns) breakdowns.push_back(breakdown_to_json(b));
  json j{{"breakdowns", breakdowns}, {"engine_version", response.engine_version}};
  if (response.advantages) j["advantages"] = *response.advantages;
  return j;
}

ScoreResponse handle_score(const ScoreRequest& request, Judge& judge,
                           const GrpoConfig& grpo) {
  ScoreResponse out;
  out.breakdowns = score_group(request.task, request.candidates, &judge,
                               request.requires_think);
  if (request.normalize) {
    std::vector<double> totals;
    totals.reserve(out.breakdowns.size());
    for (const auto& b : out.breakdowns) totals.push_back(b.total);
    out.advantages = group_advantages(totals, grpo.epsilon_sigma).advantages;
  }
  out.engine_version = kEngineVersion;
  return out;
}

struct RewardService::Impl {
  AppConfig config;
  std::unique_ptr<Judge> judge;
  httplib::Server server;
  std::thread worker;
};

RewardService::RewardService(AppConfig config) : impl_(std::make_unique<Impl>()) {
  impl_->config = std::move(config);
  impl_->judge = make_judge(impl_->config.judge);

  impl_->server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(json{{"status", "ok"}, {"engine_version", kEngineVersion}}.dump(),
                    "application/json");
  });

  impl_->server.Post("/score", [this](const httplib::Request& req, httplib::Response& res) {
    auto fail = [&](int status, const std::string& message) {
      res.status = status;
      res.set_content(json{{"error", message}}.dump(), "application/json");
    };
    try {
      json body = json::parse(req.body);
      ScoreRequest request = score_request_from_json(body);
      ScoreResponse response =
          handle_score(request, *impl_->judge, impl_->config.grpo);
      res.set_content(score_response_to_json(response).dump(), "application/json");
    } catch (const json::exception& e) {
      fail(400, std::string("invalid JSON: ") + e.what());
    } catch (const SchemaError& e) {
      fail(400, e.what());
    } catch (const MissingComponent& e) {
      fail(422, e.what());
    } catch (const JudgeUnavailable& e) {
      fail(502, e.what());
    } catch (const std::exception& e) {
      log_error(std::string("score handler: ") + e.what());
      fail(500, e.what());
    }
  });
}

RewardService::~RewardService() { stop(); }

int RewardService::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
    if (bound <= 0) throw IoError("service: cannot bind to " + host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    throw IoError("service: cannot bind to " + host + ":" + std::to_string(port));
  }
  impl_->worker = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void RewardService::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
  if (impl_ && impl_->worker.joinable()) impl_->worker.join();
}

}  // namespace strew
