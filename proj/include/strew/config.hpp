#pragma once

#include <memory>
#include <optional>
#include <string>

#include "strew/clue.hpp"
#include "strew/grpo.hpp"
#include "strew/judge.hpp"
#include "strew/toy.hpp"

namespace strew {

struct JudgeSelection {
  std::string type = "oracle";  // "oracle" | "http"
  RemoteJudgeConfig remote;
};

/// Process-wide settings: one JSON config file plus STREW_* environment
/// overrides (applied after the file).
struct AppConfig {
  JudgeSelection judge;
  GrpoConfig grpo;
  ClueConfig clue;
  ToyTrainConfig toy;
};

AppConfig load_config(const std::optional<std::string>& path);

std::unique_ptr<Judge> make_judge(const JudgeSelection& selection);

}  // namespace strew
