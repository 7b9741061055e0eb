#pragma once

#include <random>
#include <vector>

#include <Eigen/Core>

namespace fsoalloc {

/// Parameters of the stochastic allocation policy: one truncated Gaussian
/// per RRH for the transmit power, one categorical per RRH for the AN choice.
struct PolicyParams {
  Eigen::VectorXd power_means;      // N, each in [0, p_peak]
  Eigen::MatrixXd selection_logits; // N x M
  double power_std = 0.0;           // shared stddev, fixed hyperparameter
  double p_peak = 0.0;              // truncation upper bound P_s
  bool allow_idle = false;          // adds a no-transmit category with logit 0

  int n_rrh() const { return static_cast<int>(power_means.size()); }
  int n_an() const { return static_cast<int>(selection_logits.cols()); }
  /// Number of selection categories (n_an, plus one when idling is allowed).
  int n_choices() const { return n_an() + (allow_idle ? 1 : 0); }
};

/// A sampled action: per-RRH power in [0, P_s] and the selected AN index.
/// selections[n] == n_an() means "no transmission" (only with allow_idle).
struct Allocation {
  Eigen::VectorXd powers;
  std::vector<int> selections;

  int n_rrh() const { return static_cast<int>(powers.size()); }
};

/// Gradient of a scalar with respect to the policy parameters.
struct PolicyGrad {
  Eigen::VectorXd d_power_means;
  Eigen::MatrixXd d_selection_logits;
};

/// Draws powers by inverse-CDF truncated-Gaussian sampling on [0, p_peak]
/// and selections from softmax(selection_logits) rows, independently per RRH.
Allocation sample(const PolicyParams& params, std::mt19937_64& rng);

/// Log density of `a` under the policy. Throws std::invalid_argument when the
/// allocation is outside the support (powers only ever come from `sample`, so
/// an out-of-support value is a harness bug).
double log_prob(const PolicyParams& params, const Allocation& a);

/// Closed-form score function: for power means the truncated-Gaussian score,
/// for selection logits one_hot(selection) - softmax(logits).
PolicyGrad log_prob_grad(const PolicyParams& params, const Allocation& a);

/// Selection probabilities for RRH n, softmax over n_choices() categories.
Eigen::VectorXd selection_probs(const PolicyParams& params, int n);

}  // namespace fsoalloc
