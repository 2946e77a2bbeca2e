#pragma once

#include <json.hpp>

#include "strew/clue.hpp"
#include "strew/metrics.hpp"
#include "strew/rewards.hpp"
#include "strew/toy.hpp"
#include "strew/types.hpp"

namespace strew {

using json = nlohmann::json;

// Dataset records. from_* functions throw SchemaError on shape or invariant
// violations (without a line number; file loaders add it).

json video_to_json(const VideoRef& video);
VideoRef video_from_json(const json& j);

json gt_to_json(const GroundTruth& gt, TaskKind kind);
GroundTruth gt_from_json(const json& j, TaskKind kind);

json task_to_json(const TaskInstance& task);
TaskInstance task_from_json(const json& j);

json interval_to_json(const TemporalInterval& interval);
TemporalInterval interval_from_json(const json& j);

// Reports and traces.

json breakdown_to_json(const RewardBreakdown& breakdown);
RewardBreakdown breakdown_from_json(const json& j);

json metric_report_to_json(const MetricReport& report);

json parsed_response_to_json(const ParsedResponse& response);

json perception_request_to_json(const PerceptionRequest& request);
json clue_session_to_json(const ClueSession& session, const std::string& task_id);

json toy_train_config_to_json(const ToyTrainConfig& cfg);
json train_report_to_json(const TrainReport& report);

}  // namespace strew
