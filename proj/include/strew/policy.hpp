#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "strew/rng.hpp"

namespace strew {

/// Linear-softmax categorical policy: logits = (W x) / temperature. Small
/// enough for exact probabilities and closed-form gradients, which keeps the
/// finite-difference checks tight.
struct ToyPolicy {
  int n_actions = 0;
  int feature_dim = 0;
  double temperature = 1.0;
  std::vector<double> weights;  // row-major, n_actions x feature_dim

  static ToyPolicy zeros(int n_actions, int feature_dim, double temperature = 1.0) {
    ToyPolicy p;
    p.n_actions = n_actions;
    p.feature_dim = feature_dim;
    p.temperature = temperature;
    p.weights.assign(static_cast<size_t>(n_actions) * feature_dim, 0.0);
    return p;
  }

  double w(int action, int j) const { return weights[static_cast<size_t>(action) * feature_dim + j]; }
  double& w(int action, int j) { return weights[static_cast<size_t>(action) * feature_dim + j]; }

  bool greedy_only() const { return temperature <= 1e-12; }

  void logits_into(std::span<const double> x, std::vector<double>& out) const {
    out.assign(n_actions, 0.0);
    double tau = greedy_only() ? 1.0 : temperature;
    for (int a = 0; a < n_actions; ++a) {
      double dot = 0.0;
      const double* row = weights.data() + static_cast<size_t>(a) * feature_dim;
      for (int j = 0; j < feature_dim; ++j) dot += row[j] * x[j];
      out[a] = dot / tau;
    }
  }

  std::vector<double> log_probs(std::span<const double> x) const {
    std::vector<double> z;
    logits_into(x, z);
    double zmax = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - zmax);
    double lse = zmax + std::log(sum);
    for (double& v : z) v -= lse;
    return z;
  }

  double logp(std::span<const double> x, int action) const {
    if (greedy_only()) return action == argmax(x) ? 0.0 : -INFINITY;
    return log_probs(x)[action];
  }

  int argmax(std::span<const double> x) const {
    std::vector<double> z;
    logits_into(x, z);
    return static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
  }

  /// Inverse-CDF sample from softmax(logits); at (near-)zero temperature the
  /// draw collapses onto the argmax.
  int sample(std::span<const double> x, Rng& rng) const {
    if (greedy_only()) return argmax(x);
    std::vector<double> lp = log_probs(x);
    double u = rng.uniform();
    double cum = 0.0;
    for (int a = 0; a < n_actions; ++a) {
      cum += std::exp(lp[a]);
      if (u < cum) return a;
    }
    return n_actions - 1;
  }
};

}  // namespace strew
