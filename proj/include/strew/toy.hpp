#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "strew/grpo.hpp"
#include "strew/metrics.hpp"
#include "strew/policy.hpp"
#include "strew/types.hpp"

namespace strew {

enum class DomainTag { InDomain, ShiftedDomain };
enum class DecodeMode { Greedy, Sample };

const char* to_string(DomainTag tag);

/// Generator knobs for the synthetic task families. Instances draw an event
/// archetype; the feature summary carries a noisy archetype encoding in its
/// first dims plus pure distractor dims. The shifted domain displaces the
/// event statistics, lengthens durations, attenuates the archetype signal
/// and inflates the distractors.
struct ToyEnvConfig {
  int start_bins = 32;   // K
  int length_bins = 16;  // L
  int feature_dim = 16;  // d
  int n_archetypes = 8;
  double temperature = 1.0;
  double jitter = 0.02;  // gt start/length jitter, in duration fractions
  double signal_scale_in = 1.0;
  double signal_scale_shift = 0.6;
  double signal_noise = 0.05;
  double distractor_noise = 0.3;
  double distractor_noise_shift = 1.2;
  double dur_in_lo = 20.0, dur_in_hi = 40.0;
  double dur_shift_lo = 50.0, dur_shift_hi = 90.0;
  double shift_offset_start = 0.05;
  double shift_offset_length = 0.05;
  int n_options = 4;  // MultiChoiceQA action space

  int n_actions(TaskKind kind) const {
    return kind == TaskKind::MultiChoiceQA ? n_options : start_bins * length_bins;
  }
};

struct SyntheticTask {
  TaskInstance instance;
  std::vector<double> features;
  DomainTag domain = DomainTag::InDomain;
  int archetype = 0;
  int gt_action = 0;  // grid action closest to gt (exact argmax-IoU encode)
};

/// Deterministic under seed. Supported kinds: TemporalGrounding and
/// MultiChoiceQA.
std::vector<SyntheticTask> gen_tasks(uint64_t seed, int n, TaskKind kind, DomainTag tag,
                                     const ToyEnvConfig& cfg);

/// Action grid over [0, duration]: action = start_bin * L + length_bin;
/// start = k/K * duration, length = (l+1)/L * duration (end clamped).
TemporalInterval decode_action(int action, double duration, const ToyEnvConfig& cfg);
/// Grid action with maximal IoU against gt (ties to the lower index).
int encode_action(const TemporalInterval& gt, double duration, const ToyEnvConfig& cfg);

struct RolloutSample {
  std::string answer_text;
  double logp = 0.0;
  int action = 0;
};

/// G policy samples rendered as canonical answer texts, so the full
/// parse -> reward path runs on every candidate.
std::vector<RolloutSample> policy_rollout(const ToyPolicy& policy, const SyntheticTask& task,
                                          int group_count, uint64_t seed,
                                          const ToyEnvConfig& cfg, bool with_think = false);

struct ToyTrainConfig {
  GrpoConfig grpo;
  ToyEnvConfig env;
  TaskKind kind = TaskKind::TemporalGrounding;
  int steps = 2000;
  int batch_groups = 8;  // groups (tasks) per optimization step
  int n_train = 128;     // finite training set, iterated in shuffled passes
  int n_eval = 512;
  int eval_every = 100;  // shifted/in-domain snapshot cadence; 0 disables
  double sft_learning_rate = 0.15;
  bool requires_think = false;
};

struct StepRecord {
  int step = 0;
  double mean_reward = 0.0;
  double mean_kl = 0.0;
  double objective = 0.0;
};

struct EvalSnapshot {
  int step = 0;
  double in_score = 0.0;       // mIoU for grounding, accuracy for QA
  double shifted_score = 0.0;
};

struct TrainReport {
  std::string algo;  // "grpo" or "sft"
  ToyTrainConfig config;
  uint64_t seed = 0;
  std::vector<StepRecord> series;        // one record per step
  std::vector<EvalSnapshot> eval_series; // step 0, each cadence point, final
  MetricReport final_in;
  MetricReport final_shifted;
};

/// GRPO loop: generate / rollout / score_group / advantages / grpo_step.
/// Rewards come from the reward engine applied to the rendered texts; the
/// trainer has no private reward path.
TrainReport train_grpo(const ToyTrainConfig& cfg);

/// Same environment and task stream, but plain cross-entropy toward the
/// gt grid action: no groups, no KL.
TrainReport train_sft(const ToyTrainConfig& cfg);

/// Greedy (argmax) decode by default; Sample mode draws one action per task,
/// which is how the uniform-random baseline is measured.
MetricReport eval_policy(const ToyPolicy& policy, const std::vector<SyntheticTask>& tasks,
                         const ToyEnvConfig& cfg, DecodeMode mode = DecodeMode::Greedy,
                         uint64_t sample_seed = 0);

/// The report's primary scalar: miou when defined, else accuracy.
double primary_score(const MetricReport& report);

}  // namespace strew
