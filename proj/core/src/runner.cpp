#include "fsoalloc/runner.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "fsoalloc/harness.hpp"
#include "fsoalloc/io.hpp"
#include "fsoalloc/rng.hpp"

namespace fsoalloc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void apply_common(RunConfig& cfg, const Overrides& ov, bool train_seed) {
  if (ov.seed) {
    if (train_seed)
      cfg.train.train_seed = *ov.seed;
    else
      cfg.eval_seed = *ov.seed;
  }
  if (ov.iters) cfg.train.iterations = *ov.iters;
  if (ov.restarts) cfg.restarts = *ov.restarts;
  cfg.validate();
}

std::string ensure_out_dir(const std::string& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir))
    throw std::runtime_error("out-dir is not writable: " + out_dir);
  // Probe writability early so failures surface before training.
  const fs::path probe = fs::path(out_dir) / ".write_probe";
  std::ofstream f(probe);
  if (!f) throw std::runtime_error("out-dir is not writable: " + out_dir);
  f.close();
  fs::remove(probe, ec);
  return out_dir;
}

json config_json(const RunConfig& cfg) {
  return json{
      {"n_rrh", cfg.n_rrh},
      {"n_an", cfg.n_an},
      {"p_total", cfg.train.p_total},
      {"p_peak", cfg.train.p_peak},
      {"c_cap", cfg.train.c_cap},
      {"topology_seed", cfg.topology_seed},
      {"train_seed", cfg.train.train_seed},
      {"eval_seed", cfg.eval_seed},
      {"iterations", cfg.train.iterations},
      {"batch_size", cfg.train.batch_size},
      {"restarts", cfg.restarts},
      {"adam_lr", cfg.train.adam.lr},
      {"adam_beta1", cfg.train.adam.beta1},
      {"adam_beta2", cfg.train.adam.beta2},
      {"adam_eps", cfg.train.adam.eps},
      {"dual_step", cfg.train.dual_step0},
      {"dual_decay", cfg.train.dual_decay},
      {"lambda_init", cfg.train.lambda_init},
      {"power_std_frac", cfg.train.power_std_frac},
      {"allow_idle", cfg.train.allow_idle},
      {"baseline_subtract", cfg.train.baseline_subtract},
      {"gnn_layers", cfg.gnn_layers},
      {"gnn_features", cfg.gnn_features},
      {"gnn_filter_order", cfg.gnn_filter_order},
      {"atten_rate", cfg.fading.attenuation_rate},
      {"fading_sigma", cfg.fading.lognormal_sigma},
      {"snr_gain", cfg.fading.snr_gain},
      {"bandwidth", cfg.fading.bandwidth_scale},
      {"eval_samples", cfg.eval_samples},
      {"feas_tol_frac", cfg.feas_tol_frac},
  };
}

void echo_config(const RunConfig& cfg) {
  const json j = config_json(cfg);
  std::cout << "resolved config:\n";
  for (const auto& [k, v] : j.items()) std::cout << "  " << k << " = " << v << "\n";
}

void write_metrics_csv(const std::string& path, const TrainMetrics& metrics,
                       int n_an) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "iter,objective,lagrangian";
  for (int i = 0; i <= n_an; ++i) out << ",lambda_" << i;
  out << ",power_slack";
  for (int m = 1; m <= n_an; ++m) out << ",cong_slack_" << m;
  out << "\n";
  out << std::setprecision(17);
  for (const IterationRecord& r : metrics) {
    out << r.iter << "," << r.objective << "," << r.lagrangian;
    for (int i = 0; i < r.lambda.size(); ++i) out << "," << r.lambda[i];
    out << "," << r.power_slack;
    for (int m = 0; m < r.congestion_slack.size(); ++m)
      out << "," << r.congestion_slack[m];
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed for " + path);
}

json mode_json(const EvalModeReport& r) {
  return json{
      {"objective_mean", r.objective_mean},
      {"objective_se", r.objective_se},
      {"power_mean", r.power_mean},
      {"an_load_mean", std::vector<double>(r.an_load_mean.begin(), r.an_load_mean.end())},
      {"power_feasible", r.power_feasible},
      {"congestion_feasible", r.congestion_feasible},
  };
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("write failed for " + path);
}

GnnParams load_model_checked(const std::string& path, const RunConfig& cfg) {
  GnnParams params = load_params(path);
  if (params.config().output_features != cfg.n_an + 1)
    throw std::runtime_error(
        "model/config shape mismatch: model emits " +
        std::to_string(params.config().output_features) +
        " output features, config needs " + std::to_string(cfg.n_an + 1));
  return params;
}

}  // namespace

PermutationMap parse_perm_spec(const std::string& spec) {
  std::vector<int> mapping;
  std::stringstream in(spec);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      mapping.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw std::runtime_error("bad permutation entry: '" + item + "'");
    }
  }
  return PermutationMap(std::move(mapping));
}

int run_train(RunConfig cfg, const Overrides& ov, const std::string& out_dir) {
  apply_common(cfg, ov, /*train_seed=*/true);
  ensure_out_dir(out_dir);
  echo_config(cfg);

  const Topology topo = sample_topology(cfg.n_rrh, cfg.n_an, cfg.topology_seed);
  const TrainResult result =
      train_best_of(cfg.train, topo, cfg.fading, cfg.gnn(), cfg.restarts);

  const fs::path dir(out_dir);
  write_metrics_csv((dir / "metrics.csv").string(), result.metrics, cfg.n_an);
  save_params((dir / "model.bin").string(), result.theta);
  save_topology((dir / "topology.txt").string(), topo);

  json manifest{
      {"tool", "fsoalloc"},
      {"version", kVersion},
      {"config", config_json(cfg)},
      {"final_lambda", std::vector<double>(result.duals.lambda.begin(),
                                           result.duals.lambda.end())},
      {"model_file", "model.bin"},
      {"metrics_file", "metrics.csv"},
      {"topology_file", "topology.txt"},
      {"iterations_recorded", result.metrics.size()},
  };
  write_json((dir / "manifest.json").string(), manifest);

  if (!result.metrics.empty()) {
    const IterationRecord& last = result.metrics.back();
    std::cout << "final iteration " << last.iter << ": objective "
              << last.objective << ", lagrangian " << last.lagrangian << "\n";
  }
  std::cout << "wrote " << (dir / "model.bin").string() << "\n";
  return 0;
}

int run_eval(const std::string& model_path, RunConfig cfg, const Overrides& ov,
             const std::string& out_dir, bool strict) {
  apply_common(cfg, ov, /*train_seed=*/false);
  ensure_out_dir(out_dir);

  const GnnParams params = load_model_checked(model_path, cfg);
  const Topology topo = sample_topology(cfg.n_rrh, cfg.n_an, cfg.topology_seed);
  const EvalReport report =
      evaluate(params, topo, cfg.fading, cfg.train, cfg.eval_samples,
               cfg.eval_seed, cfg.feas_tol_frac);
  const EvalModeReport base =
      evaluate_baseline(topo, cfg.fading, cfg.train, cfg.eval_samples,
                        cfg.eval_seed + 1, cfg.feas_tol_frac);

  json j{
      {"tool", "fsoalloc"},
      {"version", kVersion},
      {"config", config_json(cfg)},
      {"n_samples", report.n_samples},
      {"feas_tol_frac", report.feas_tol_frac},
      {"mean_action", mode_json(report.mean_mode)},
      {"stochastic", mode_json(report.stochastic_mode)},
      {"baseline", mode_json(base)},
  };
  write_json((fs::path(out_dir) / "report.json").string(), j);

  std::cout << "stochastic objective " << report.stochastic_mode.objective_mean
            << " (baseline " << base.objective_mean << ")\n";
  const bool feasible = report.stochastic_mode.power_feasible &&
                        report.stochastic_mode.congestion_feasible;
  if (strict && !feasible) {
    std::cerr << "strict: feasibility flags failed\n";
    return 2;
  }
  return 0;
}

int run_permtest(const std::string& model_path, RunConfig cfg,
                 const Overrides& ov, const std::string& out_dir,
                 const std::vector<std::string>& perm_specs, int n_random,
                 int n_samples, bool strict) {
  apply_common(cfg, ov, /*train_seed=*/false);
  ensure_out_dir(out_dir);

  const GnnParams params = load_model_checked(model_path, cfg);
  const Topology topo = sample_topology(cfg.n_rrh, cfg.n_an, cfg.topology_seed);

  std::vector<PermutationMap> perms;
  for (const std::string& spec : perm_specs) {
    PermutationMap p = parse_perm_spec(spec);
    if (p.size() != cfg.n_rrh + cfg.n_an)
      throw std::runtime_error("permutation length " + std::to_string(p.size()) +
                               " does not match N+M");
    perms.push_back(std::move(p));
  }
  if (perms.empty() && cfg.n_rrh == 5 && cfg.n_an == 2) {
    // The two reference relabelings of the 5-RRH/2-AN setup.
    perms.emplace_back(std::vector<int>{2, 3, 4, 1, 0, 5, 6});
    perms.emplace_back(std::vector<int>{1, 0, 4, 3, 2, 6, 5});
  }
  auto rng = seeded_rng(cfg.eval_seed, 7777);
  for (int i = 0; i < n_random; ++i)
    perms.push_back(
        PermutationMap::random_class_preserving(cfg.n_rrh, cfg.n_an, rng));
  if (perms.empty())
    throw std::runtime_error("permtest: no permutations given (use --perm or --random-perms)");

  const PermTestReport report = permutation_test(
      params, topo, cfg.fading, cfg.train, perms, n_samples, cfg.eval_seed);

  json entries = json::array();
  for (std::size_t i = 0; i < report.entries.size(); ++i) {
    const PermTestEntry& e = report.entries[i];
    json mapping = json::array();
    for (int v : perms[i].mapping()) mapping.push_back(v);
    entries.push_back(json{
        {"name", e.name},
        {"mapping", mapping},
        {"coupled_objective", e.coupled_objective},
        {"coupled_rel_diff", e.coupled_rel_diff},
        {"independent_objective", e.independent_objective},
    });
  }
  json j{
      {"tool", "fsoalloc"},
      {"version", kVersion},
      {"config", config_json(cfg)},
      {"n_samples", report.n_samples},
      {"coupled_mode", "mean action on shared CSI draws"},
      {"original_objective", report.original_objective},
      {"original_independent", report.original_independent},
      {"permutations", entries},
      {"coupled_max_rel_diff", report.coupled_max_rel_diff},
      {"independent_rel_spread", report.independent_rel_spread},
  };
  write_json((fs::path(out_dir) / "report.json").string(), j);

  std::cout << "coupled max rel diff " << report.coupled_max_rel_diff
            << ", independent rel spread " << report.independent_rel_spread
            << "\n";
  if (strict && report.coupled_max_rel_diff > 1e-9) {
    std::cerr << "strict: coupled permutation mismatch\n";
    return 2;
  }
  return 0;
}

int run_baseline(RunConfig cfg, const Overrides& ov, const std::string& out_dir) {
  apply_common(cfg, ov, /*train_seed=*/false);
  ensure_out_dir(out_dir);

  const Topology topo = sample_topology(cfg.n_rrh, cfg.n_an, cfg.topology_seed);
  const EvalModeReport base =
      evaluate_baseline(topo, cfg.fading, cfg.train, cfg.eval_samples,
                        cfg.eval_seed, cfg.feas_tol_frac);
  const double per_rrh_power =
      std::min(cfg.train.p_total / cfg.n_rrh, cfg.train.p_peak);

  json j{
      {"tool", "fsoalloc"},
      {"version", kVersion},
      {"config", config_json(cfg)},
      {"n_samples", cfg.eval_samples},
      {"per_rrh_power", per_rrh_power},
      {"baseline", mode_json(base)},
  };
  write_json((fs::path(out_dir) / "report.json").string(), j);
  std::cout << "baseline objective " << base.objective_mean << " (power "
            << per_rrh_power << " W per RRH)\n";
  return 0;
}

}  // namespace fsoalloc
