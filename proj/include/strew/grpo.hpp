#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "strew/policy.hpp"
#include "strew/types.hpp"

namespace strew {

struct GrpoConfig {
  int group_size = 8;            // G
  double clip_epsilon = 0.2;     // surrogate ratio clip
  double kl_coefficient = 0.04;  // beta
  double epsilon_sigma = 1e-8;   // degenerate-group cutoff for the reward std
  double learning_rate = 0.05;
  uint64_t seed = 0;
};

/// One scored group of G candidates for the same query. Log-probabilities
/// are per-candidate sums of action log-probs, in nats.
struct Group {
  std::string query_id;
  std::vector<double> rewards;
  std::vector<double> logp_current;
  std::vector<double> logp_old;
  std::vector<double> logp_ref;
};

struct AdvantageVector {
  std::vector<double> advantages;
  double group_mean = 0.0;
  double group_std = 0.0;  // population std
};

/// Group-normalized advantages: (R_i - mean) / std with the population std.
/// When std <= epsilon_sigma the group carries no relative signal and the
/// advantages are exactly zero.
AdvantageVector group_advantages(const std::vector<double>& rewards, double epsilon_sigma);

/// Non-negative estimator r - log r - 1 with r = exp(logp_ref - logp_current).
/// Zero iff the log-probabilities are equal.
double kl_penalty(double logp_current, double logp_ref);

struct SurrogateResult {
  double objective = 0.0;  // group mean of per-candidate terms
  std::vector<double> per_candidate;
};

/// Clipped surrogate with KL penalty, per candidate:
/// min(rho*A, clip(rho, 1-eps, 1+eps)*A) - beta*kl, rho = exp(lp - lp_old).
SurrogateResult surrogate_objective(const Group& group, const AdvantageVector& adv,
                                    const GrpoConfig& cfg);

/// A group enriched with what the policy-gradient step needs: the query
/// features (shared by the G candidates) and the sampled action indices.
struct TrainGroup {
  std::string query_id;
  std::vector<double> features;
  std::vector<int> actions;
  std::vector<double> rewards;
  std::vector<double> logp_old;
  std::vector<double> logp_ref;
};

struct StepStats {
  double mean_reward = 0.0;
  double mean_kl = 0.0;
  double objective = 0.0;
};

/// Batch surrogate value at the policy's current parameters (advantages are
/// recomputed from the stored rewards). Mean over groups.
double batch_objective(const ToyPolicy& policy, const std::vector<TrainGroup>& groups,
                       const GrpoConfig& cfg);

/// One ascent step on the batch surrogate via the analytic gradient of the
/// categorical log-probabilities. Throws NonFiniteGradient when any gradient
/// component is not finite.
StepStats grpo_step(ToyPolicy& policy, const std::vector<TrainGroup>& groups,
                    const GrpoConfig& cfg);

}  // namespace strew
