#pragma once

#include <cstdint>
#include <string>

#include "fsoalloc/channel.hpp"
#include "fsoalloc/gnn.hpp"
#include "fsoalloc/optim.hpp"

namespace fsoalloc {

/// Resolved experiment configuration. Parsed from a flat key = value text
/// file; see docs in parse_config for the schema.
struct RunConfig {
  int n_rrh = 0;
  int n_an = 0;
  std::uint64_t topology_seed = 1;
  std::uint64_t eval_seed = 99;
  int eval_samples = 10000;
  double feas_tol_frac = 0.02;
  int restarts = 1;
  TrainConfig train;
  FadingConfig fading;
  int gnn_layers = 8;
  int gnn_features = 1;
  int gnn_filter_order = 5;

  GnnConfig gnn() const {
    return GnnConfig{gnn_layers, gnn_features, gnn_filter_order, n_an + 1};
  }
  void validate() const;
};

/// Parses the key = value config format ('#' starts a comment). Required
/// keys: n_rrh, n_an, p_total, p_peak, c_cap. Optional keys (defaults in
/// parentheses): topology_seed (1), train_seed (7), eval_seed (99),
/// iterations (5000), batch_size (32), restarts (1), adam_lr (5e-3),
/// adam_beta1 (0.9), adam_beta2 (0.999), adam_eps (1e-8), dual_step (0.1),
/// dual_decay (0.9995), lambda_init (0), power_std_frac (0.1),
/// allow_idle (0), baseline_subtract (0), gnn_layers (8), gnn_features (1),
/// gnn_filter_order (5), atten_rate (0.2), fading_sigma (0.5), snr_gain (10),
/// bandwidth (1), eval_samples (10000), feas_tol_frac (0.02).
/// Throws std::runtime_error naming every missing/unknown/malformed key.
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config(const std::string& path);

}  // namespace fsoalloc
