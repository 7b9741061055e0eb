#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fsoalloc/channel.hpp"
#include "fsoalloc/gnn.hpp"
#include "fsoalloc/graph.hpp"
#include "fsoalloc/optim.hpp"
#include "fsoalloc/policy.hpp"

namespace fsoalloc {

/// Comparison policy: equal power min(P_t/N, P_s) at every RRH, AN chosen
/// uniformly at random per RRH.
Allocation baseline_alloc(const Topology& t, const TrainConfig& cfg,
                          std::mt19937_64& rng);

/// Deterministic action at the distribution center: powers at the means,
/// selection at the highest-probability category.
Allocation mean_action(const PolicyParams& params);

/// Monte-Carlo estimates for one evaluation mode.
struct EvalModeReport {
  double objective_mean = 0.0;
  double objective_se = 0.0;
  double power_mean = 0.0;             // mean of sum_n P_n
  Eigen::VectorXd an_load_mean;        // length M
  bool power_feasible = false;         // power_mean <= P_t (1 + tol)
  bool congestion_feasible = false;    // every load <= C_t (1 + tol)
};

struct EvalReport {
  EvalModeReport mean_mode;
  EvalModeReport stochastic_mode;
  int n_samples = 0;
  double feas_tol_frac = 0.0;
};

/// Evaluates a trained policy over fresh CSI draws, reporting the mean action
/// and the stochastic policy separately. Deterministic per seed.
EvalReport evaluate(const GnnParams& theta, const Topology& t,
                    const FadingConfig& fading, const TrainConfig& cfg,
                    int n_samples, std::uint64_t seed,
                    double feas_tol_frac = 0.02);

/// Same estimates for the baseline policy.
EvalModeReport evaluate_baseline(const Topology& t, const FadingConfig& fading,
                                 const TrainConfig& cfg, int n_samples,
                                 std::uint64_t seed,
                                 double feas_tol_frac = 0.02);

struct PermTestEntry {
  std::string name;
  double coupled_objective = 0.0;      // same CSI draws, permuted
  double coupled_rel_diff = 0.0;       // vs the unpermuted coupled run
  double independent_objective = 0.0;  // fresh draws for this network
};

struct PermTestReport {
  double original_objective = 0.0;     // coupled-mode reference
  double original_independent = 0.0;
  std::vector<PermTestEntry> entries;
  int n_samples = 0;
  /// (max - min) / mean of the independent estimates, original included.
  double independent_rel_spread = 0.0;
  double coupled_max_rel_diff = 0.0;
};

/// The relabeling experiment. Coupled mode feeds the same CSI draws through
/// the permuted network with the mean action, so equivariance makes the
/// objective match the original run; independent mode evaluates each network
/// on its own fresh draws. Throws on a non-class-preserving map.
PermTestReport permutation_test(const GnnParams& theta, const Topology& t,
                                const FadingConfig& fading,
                                const TrainConfig& cfg,
                                std::span<const PermutationMap> perms,
                                int n_samples, std::uint64_t seed);

/// Applies a class-preserving relabeling to the topology (positions and
/// weights follow their nodes).
Topology permute_topology(const PermutationMap& p, const Topology& t);

/// Channel matrix of the relabeled network: rows/columns follow the map.
ChannelMatrix permute_channel(const PermutationMap& p, const ChannelMatrix& h,
                              int n_rrh, int n_an);

}  // namespace fsoalloc
