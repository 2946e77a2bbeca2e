#include "strew/grpo.hpp"

#include <cmath>

#include "strew/types.hpp"

namespace strew {

AdvantageVector group_advantages(const std::vector<double>& rewards, double epsilon_sigma) {
  AdvantageVector out;
  const size_t n = rewards.size();
  if (n == 0) return out;

  // Center on the first reward before the moments. A constant shift of the
  // rewards then yields the identical centered vector, so the advantages are
  // bit-exactly shift invariant (and scale invariant for exact scalings).
  std::vector<double> centered(n);
  for (size_t i = 0; i < n; ++i) centered[i] = rewards[i] - rewards[0];

  double centered_mean = 0.0;
  for (double c : centered) centered_mean += c;
  centered_mean /= static_cast<double>(n);
  double var = 0.0;
  for (double c : centered) var += (c - centered_mean) * (c - centered_mean);
  var /= static_cast<double>(n);
  double std_dev = std::sqrt(var);

  out.group_mean = rewards[0] + centered_mean;
  out.group_std = std_dev;
  out.advantages.resize(n, 0.0);
  if (std_dev > epsilon_sigma)
    for (size_t i = 0; i < n; ++i) out.advantages[i] = (centered[i] - centered_mean) / std_dev;
  return out;
}

double kl_penalty(double logp_current, double logp_ref) {
  double d = logp_ref - logp_current;
  double value = std::exp(d) - d - 1.0;
  return value > 0.0 ? value : 0.0;  // clamp fp residue; >= 0 analytically
}

namespace {

double clip(double v, double lo, double hi) { return v < lo ? lo : (v > hi ? hi : v); }

double surrogate_term(double rho, double advantage, double kl, const GrpoConfig& cfg) {
  double unclipped = rho * advantage;
  double clipped = clip(rho, 1.0 - cfg.clip_epsilon, 1.0 + cfg.clip_epsilon) * advantage;
  return std::min(unclipped, clipped) - cfg.kl_coefficient * kl;
}

}  // namespace

SurrogateResult surrogate_objective(const Group& group, const AdvantageVector& adv,
                                    const GrpoConfig& cfg) {
  SurrogateResult out;
  const size_t n = group.rewards.size();
  out.per_candidate.resize(n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    double rho = std::exp(group.logp_current[i] - group.logp_old[i]);
    double kl = kl_penalty(group.logp_current[i], group.logp_ref[i]);
    out.per_candidate[i] = surrogate_term(rho, adv.advantages[i], kl, cfg);
    out.objective += out.per_candidate[i];
  }
  if (n > 0) out.objective /= static_cast<double>(n);
  return out;
}

double batch_objective(const ToyPolicy& policy, const std::vector<TrainGroup>& groups,
                       const GrpoConfig& cfg) {
  double total = 0.0;
  for (const auto& tg : groups) {
    Group g;
    g.query_id = tg.query_id;
    g.rewards = tg.rewards;
    g.logp_old = tg.logp_old;
    g.logp_ref = tg.logp_ref;
    std::vector<double> lp = policy.log_probs(tg.features);
    for (int a : tg.actions) g.logp_current.push_back(lp[a]);
    AdvantageVector adv = group_advantages(tg.rewards, cfg.epsilon_sigma);
    total += surrogate_objective(g, adv, cfg).objective;
  }
  return groups.empty() ? 0.0 : total / static_cast<double>(groups.size());
}

StepStats grpo_step(ToyPolicy& policy, const std::vector<TrainGroup>& groups,
                    const GrpoConfig& cfg) {
  if (groups.empty()) throw EmptyInput("grpo_step: empty batch");

  const int n_actions = policy.n_actions;
  const int d = policy.feature_dim;
  const double tau = policy.greedy_only() ? 1.0 : policy.temperature;
  std::vector<double> grad(static_cast<size_t>(n_actions) * d, 0.0);

  StepStats stats;
  size_t n_candidates = 0;
  const double group_weight = 1.0 / static_cast<double>(groups.size());

  for (const auto& tg : groups) {
    const size_t g_size = tg.rewards.size();
    AdvantageVector adv = group_advantages(tg.rewards, cfg.epsilon_sigma);
    std::vector<double> lp = policy.log_probs(tg.features);
    std::vector<double> probs(n_actions);
    for (int a = 0; a < n_actions; ++a) probs[a] = std::exp(lp[a]);

    // d logp(a|x)/dW = (e_a - p) x^T / tau; fold the per-candidate scalars
    // into one vector over actions, then rank-1 update once per group.
    std::vector<double> coef_per_action(n_actions, 0.0);
    double coef_sum = 0.0;
    double group_objective = 0.0;

    for (size_t i = 0; i < g_size; ++i) {
      const int action = tg.actions[i];
      const double logp = lp[action];
      const double rho = std::exp(logp - tg.logp_old[i]);
      const double advantage = adv.advantages[i];
      const double kl_dir = tg.logp_ref[i] - logp;
      const double r = std::exp(kl_dir);
      const double kl = kl_penalty(logp, tg.logp_ref[i]);

      // min(rho*A, clip(rho)*A) has zero derivative inside the clipped branch
      const bool active = advantage >= 0.0 ? rho <= 1.0 + cfg.clip_epsilon
                                           : rho >= 1.0 - cfg.clip_epsilon;
      const double pg_coef = active ? advantage * rho : 0.0;
      const double coef =
          (pg_coef + cfg.kl_coefficient * (r - 1.0)) / static_cast<double>(g_size) *
          group_weight;

      coef_per_action[action] += coef;
      coef_sum += coef;
      group_objective += surrogate_term(rho, advantage, kl, cfg);
      stats.mean_reward += tg.rewards[i];
      stats.mean_kl += kl;
      ++n_candidates;
    }

    const double* x = tg.features.data();
    for (int a = 0; a < n_actions; ++a) {
      const double scale = coef_per_action[a] - coef_sum * probs[a];
      if (scale == 0.0) continue;
      double* row = grad.data() + static_cast<size_t>(a) * d;
      for (int j = 0; j < d; ++j) row[j] += scale * x[j] / tau;
    }
    stats.objective += group_objective / static_cast<double>(g_size) * group_weight;
  }

  for (double g : grad)
    if (!std::isfinite(g)) throw NonFiniteGradient("grpo_step: non-finite gradient component");

  for (size_t i = 0; i < grad.size(); ++i) policy.weights[i] += cfg.learning_rate * grad[i];

  stats.mean_reward /= static_cast<double>(n_candidates);
  stats.mean_kl /= static_cast<double>(n_candidates);
  return stats;
}

}  // namespace strew
