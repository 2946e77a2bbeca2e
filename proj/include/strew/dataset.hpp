#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "strew/types.hpp"

namespace strew {

/// Loads one JSONL task file, validating every record against the kind's
/// schema. Failures carry the 1-based line number.
std::vector<TaskInstance> load_task_file(const std::string& path, TaskKind kind);

/// Canonical serialization; load(write(x)) == x.
void write_task_file(const std::vector<TaskInstance>& instances, const std::string& path);

/// Full invariant check for one instance (shared by loaders and the scoring
/// service). Throws SchemaError.
void validate_instance(const TaskInstance& instance);

/// Deterministic synthetic stand-ins for the per-task corpora.
std::vector<TaskInstance> synth_mirror(uint64_t seed, TaskKind kind, int n);

/// n split across ratios by largest remainder (ties to the lower index).
/// Ratios are normalized first and need not sum to 1.
std::vector<int> largest_remainder_counts(const std::vector<double>& ratios, int n);

struct MixComponent {
  TaskKind kind;
  double ratio;
};

/// Default corpus blend for the joint training mirror.
const std::vector<MixComponent>& default_corpus_mix();

std::vector<TaskInstance> synth_mix(uint64_t seed, const std::vector<MixComponent>& mix,
                                    int n);

/// One prediction row: either a raw answer text or (when the row is a full
/// task record) the record's gt payload taken verbatim.
struct PredictionRecord {
  std::string id;
  std::variant<std::string, GroundTruth> content;
};

std::vector<PredictionRecord> load_prediction_file(const std::string& path, TaskKind kind);

}  // namespace strew
