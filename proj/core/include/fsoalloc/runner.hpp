#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fsoalloc/config.hpp"
#include "fsoalloc/graph.hpp"

namespace fsoalloc {

inline constexpr const char* kVersion = "0.1.0";

/// Command-line overrides; unset fields keep the config file values.
struct Overrides {
  std::optional<std::uint64_t> seed;  // replaces train_seed (train) /
                                      // eval_seed (eval, permtest, baseline)
  std::optional<int> iters;
  std::optional<int> restarts;
};

/// Trains per config, then writes metrics.csv, model.bin, topology.txt and
/// manifest.json into out_dir and echoes the resolved config. Returns a
/// process exit status.
int run_train(RunConfig cfg, const Overrides& ov, const std::string& out_dir);

/// Evaluates a stored model and writes report.json. With strict=true the
/// exit status is nonzero when a feasibility flag fails.
int run_eval(const std::string& model_path, RunConfig cfg, const Overrides& ov,
             const std::string& out_dir, bool strict);

/// Permutation experiment; perm_specs are comma-separated 0-based mappings
/// (entry i = original node index placed at slot i). When empty, the two
/// relabelings of the small reference setup are used for N=5/M=2 networks and
/// `n_random` class-preserving relabelings are always appended.
int run_permtest(const std::string& model_path, RunConfig cfg,
                 const Overrides& ov, const std::string& out_dir,
                 const std::vector<std::string>& perm_specs, int n_random,
                 int n_samples, bool strict);

/// Baseline policy report.
int run_baseline(RunConfig cfg, const Overrides& ov, const std::string& out_dir);

/// Parses a comma-separated permutation spec into a map ("2,3,4,1,0,5,6").
PermutationMap parse_perm_spec(const std::string& spec);

}  // namespace fsoalloc
