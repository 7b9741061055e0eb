#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "fsoalloc/channel.hpp"
#include "fsoalloc/gnn.hpp"
#include "fsoalloc/graph.hpp"
#include "fsoalloc/policy.hpp"

namespace fsoalloc {

/// Multipliers of the relaxed constraints: lambda[0] for the expected total
/// power cap, lambda[1..M] for the per-AN congestion caps. Nonnegative always.
struct DualVars {
  Eigen::VectorXd lambda;

  static DualVars zeros(int n_an) { return DualVars{Eigen::VectorXd::Zero(n_an + 1)}; }
};

struct AdamConfig {
  double lr = 5e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  long step = 0;
};

struct TrainConfig {
  double p_total = 1.5;
  double p_peak = 0.5;
  double c_cap = 20.0;
  int batch_size = 32;
  int iterations = 5000;
  AdamConfig adam;
  double dual_step0 = 0.1;
  double dual_decay = 0.9995;
  double lambda_init = 0.0;
  double power_std_frac = 0.1;
  bool allow_idle = false;
  bool baseline_subtract = false;
  std::uint64_t train_seed = 7;

  double power_std() const { return power_std_frac * p_peak; }
  void validate() const;
};

/// One policy rollout: the CSI draw, the forward pass that produced the
/// policy, the sampled action, and the observed system quantities.
struct RolloutSample {
  ChannelMatrix h;
  ForwardCache cache;
  PolicyParams policy;
  Allocation alloc;
  double objective = 0.0;    // sum_n w_n C_{n,sel(n)}
  double total_power = 0.0;  // sum_n P_n
  Eigen::VectorXd an_loads;  // length M
};

struct LagrangianTerms {
  double objective = 0.0;
  double power_term = 0.0;
  Eigen::VectorXd congestion_terms;
  double total = 0.0;
};

struct IterationRecord {
  int iter = 0;
  double objective = 0.0;
  double lagrangian = 0.0;
  Eigen::VectorXd lambda;           // multipliers used this iteration
  double power_slack = 0.0;         // P_t - batch mean total power
  Eigen::VectorXd congestion_slack; // C_t - batch mean per-AN load
};
using TrainMetrics = std::vector<IterationRecord>;

struct TrainResult {
  GnnParams theta;
  DualVars duals;
  TrainMetrics metrics;
};

/// Runs the GNN, samples an action, and observes the synthetic system.
RolloutSample make_rollout(const Topology& t, const ChannelMatrix& h,
                           const NodeSignal& x, const GnnParams& theta,
                           const TrainConfig& cfg, const FadingConfig& fading,
                           std::mt19937_64& rng);

/// Per-sample Lagrangian reward: objective plus lambda-weighted slacks.
double lagrangian_reward(const RolloutSample& s, const DualVars& duals,
                         const TrainConfig& cfg);

/// Batch-mean estimate of each Lagrangian term. Throws on an empty batch.
LagrangianTerms lagrangian_terms(std::span<const RolloutSample> batch,
                                 const DualVars& duals, const TrainConfig& cfg);

/// Score-function estimate of the Lagrangian gradient with respect to every
/// tap: average over the batch of reward * grad log-probability, chained
/// through the output head and the GNN.
GnnParams policy_gradient(std::span<const RolloutSample> batch,
                          const GnnParams& theta, const DualVars& duals,
                          const TrainConfig& cfg);

/// Adam ascent step (maximization). Throws on a non-finite gradient.
void primal_step(GnnParams& theta, const GnnParams& grad, AdamState& state,
                 const AdamConfig& cfg);

/// Projected dual descent: lambda <- [lambda - eta * slack]_+ with the batch
/// slack estimates.
void dual_step(DualVars& duals, double mean_total_power,
               const Eigen::VectorXd& mean_loads, double eta,
               const TrainConfig& cfg);

/// The full primal-dual loop, deterministic per config seeds.
TrainResult train(const TrainConfig& cfg, const Topology& t,
                  const FadingConfig& fading, const GnnConfig& gnn_cfg);

/// Runs `restarts` independent trainings (seeds train_seed, train_seed+1, ...)
/// and keeps the one with the best feasibility-adjusted tail objective.
TrainResult train_best_of(const TrainConfig& cfg, const Topology& t,
                          const FadingConfig& fading, const GnnConfig& gnn_cfg,
                          int restarts);

}  // namespace fsoalloc
