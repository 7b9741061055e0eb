#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

#include "fsoalloc/graph.hpp"
#include "fsoalloc/policy.hpp"

namespace fsoalloc {

/// Node placement and RRH priorities. Positions are in km: RRHs on
/// [-5, 5]^2, ANs on [-1, 1]^2.
struct Topology {
  Eigen::MatrixX2d rrh_positions;  // N x 2
  Eigen::MatrixX2d an_positions;   // M x 2
  Eigen::VectorXd weights;         // N, in (0, 1]

  int n_rrh() const { return static_cast<int>(rrh_positions.rows()); }
  int n_an() const { return static_cast<int>(an_positions.rows()); }
};

/// Synthetic stand-in for the observed FSO link behavior: exponential
/// path attenuation with km-scale rate, unit-mean log-normal fading, and a
/// Shannon-style capacity with SNR gain and bandwidth scaling.
struct FadingConfig {
  double attenuation_rate = 0.2;  // per km
  double lognormal_sigma = 0.5;
  double snr_gain = 10.0;
  double bandwidth_scale = 1.0;

  void validate() const;
};

/// Equipment-status signal fed to the GNN; the default model is all ones.
NodeSignal default_node_state(int n_rrh, int n_an);

/// Uniform node placement and weights, deterministic per seed.
Topology sample_topology(int n_rrh, int n_an, std::uint64_t seed);

/// One block-fading CSI draw: h_nm = exp(-kappa d_nm) * f_nm with f_nm
/// unit-mean log-normal, i.i.d. across links and draws.
ChannelMatrix sample_csi(const Topology& t, const FadingConfig& f,
                         std::mt19937_64& rng);

/// Link capacity: B log2(1 + gamma h p) when the link is selected, else 0.
double capacity(double h, double power, bool selected, const FadingConfig& f);

/// Weighted sum of the selected links' capacities, sum_n w_n C_{n,sel(n)}.
double weighted_objective(const Topology& t, const ChannelMatrix& h,
                          const Allocation& a, const FadingConfig& f);

/// Incoming sum-capacity per AN: load[m] = sum over RRHs selecting m.
Eigen::VectorXd per_an_load(const ChannelMatrix& h, const Allocation& a,
                            const FadingConfig& f);

}  // namespace fsoalloc
