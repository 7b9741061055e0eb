#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "fsoalloc/graph.hpp"
#include "fsoalloc/policy.hpp"

namespace fsoalloc {

/// GNN architecture. The parameter count depends on these four numbers only,
/// never on the network size.
struct GnnConfig {
  int n_layers = 8;
  int hidden_features = 1;
  int filter_order = 5;
  int output_features = 0;  // = n_an + 1 for the allocation head

  int n_taps() const { return filter_order + 1; }
  /// Input feature count of 0-based layer l (the GNN input is one signal).
  int in_features(int l) const { return l == 0 ? 1 : hidden_features; }
  int out_features(int l) const {
    return l == n_layers - 1 ? output_features : hidden_features;
  }
  std::size_t param_count() const;
  void validate() const;
};

/// All filter taps, stored flat in layer-major order: layer, then output
/// feature, then input feature, then tap index. This ordering is also the
/// serialized layout (see io.hpp).
class GnnParams {
 public:
  explicit GnnParams(GnnConfig cfg);

  /// Taps i.i.d. uniform on [-a, a], a = 1/sqrt(F*(K+1)); deterministic per seed.
  static GnnParams init(const GnnConfig& cfg, std::uint64_t seed);

  const GnnConfig& config() const { return cfg_; }
  std::size_t size() const { return taps_.size(); }

  double tap(int layer, int f, int g, int k) const {
    return taps_[flat_index(layer, f, g, k)];
  }
  double& tap(int layer, int f, int g, int k) {
    return taps_[flat_index(layer, f, g, k)];
  }

  std::span<double> flat() { return taps_; }
  std::span<const double> flat() const { return taps_; }

 private:
  std::size_t flat_index(int layer, int f, int g, int k) const;

  GnnConfig cfg_;
  std::vector<double> taps_;
  std::vector<std::size_t> layer_offset_;
};

/// Everything needed to replay the forward pass in reverse: per layer the
/// shifted input signals S^k x^g (k = 0..K) and the pre-activations, plus
/// the shift matrix and input signal.
struct ForwardCache {
  struct Layer {
    std::vector<std::vector<NodeSignal>> shifted;  // [g][k]
    std::vector<NodeSignal> pre;                   // [f]
  };
  ShiftMatrix shift;
  NodeSignal input;
  std::vector<Layer> layers;
  Eigen::MatrixXd outputs;  // (N+M) x output_features, post-sigmoid
};

/// Runs the layered GNN: hidden layers apply the rectifier, the final layer
/// the logistic sigmoid, so outputs lie strictly in (0,1). Throws
/// std::runtime_error naming the layer if a non-finite value appears.
Eigen::MatrixXd forward(const NodeSignal& x, const ShiftMatrix& s,
                        const GnnParams& params, ForwardCache* cache = nullptr);

/// Reverse-mode gradient of sum_ij out_grad(i,j) * outputs(i,j) with respect
/// to every tap. Rectifier subgradient at the kink is 0.
GnnParams backward(const ForwardCache& cache, const GnnParams& params,
                   const Eigen::MatrixXd& out_grad);

/// Maps GNN outputs to policy parameters. Feature 0 at RRH rows scales the
/// peak power: mean_n = p_peak * outputs(n, 0). Features 1..M are per-node
/// selection embeddings e_i = logit(outputs(i, 1..M)); the selection logit of
/// RRH n for AN m is the dot product <e_n, e_{N+m}>, which ties the category
/// to the AN's node row so relabeled networks yield relabeled policies.
PolicyParams split_heads(const Eigen::MatrixXd& outputs, int n_rrh, int n_an,
                         double p_peak, double power_std,
                         bool allow_idle = false);

/// Chain-rule factor of split_heads: maps a gradient with respect to the
/// policy parameters back to a gradient with respect to the GNN outputs.
Eigen::MatrixXd split_heads_backward(const Eigen::MatrixXd& outputs, int n_rrh,
                                     int n_an, double p_peak,
                                     const PolicyGrad& grad);

}  // namespace fsoalloc
