#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fsoalloc/config.hpp"
#include "fsoalloc/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"GNN primal-dual resource allocation for FSO fronthaul networks"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::string model_path;
  fsoalloc::Overrides ov;
  std::uint64_t seed = 0;
  int iters = 0;
  int restarts = 0;
  bool strict = false;

  auto add_common = [&](CLI::App* cmd, bool needs_model) {
    cmd->add_option("--config", config_path, "Path to key = value config file")
        ->required();
    cmd->add_option("--out-dir", out_dir, "Output directory (default: out)");
    cmd->add_option("--seed", seed, "Override train_seed (train) / eval_seed (others)");
    cmd->add_option("--iters", iters, "Override iteration count");
    cmd->add_option("--restarts", restarts, "Override restart count");
    if (needs_model)
      cmd->add_option("--model", model_path, "Path to model.bin")->required();
  };

  CLI::App* train = app.add_subcommand("train", "Run the primal-dual training loop");
  add_common(train, false);

  CLI::App* eval = app.add_subcommand("eval", "Evaluate a trained model");
  add_common(eval, true);
  eval->add_flag("--strict", strict, "Exit nonzero when feasibility flags fail");

  CLI::App* permtest = app.add_subcommand("permtest", "Permutation experiment");
  add_common(permtest, true);
  std::vector<std::string> perm_specs;
  int n_random = 0;
  int n_samples = 100;
  permtest->add_option("--perm", perm_specs,
                       "0-based permutation, comma separated (repeatable); "
                       "entry i = original node index placed at slot i");
  permtest->add_option("--random-perms", n_random,
                       "Number of random class-preserving permutations to append");
  permtest->add_option("--samples", n_samples, "CSI draws per estimate (default 100)");
  permtest->add_flag("--strict", strict, "Exit nonzero on coupled-mode mismatch");

  CLI::App* baseline = app.add_subcommand("baseline", "Baseline policy report");
  add_common(baseline, false);

  CLI11_PARSE(app, argc, argv);

  CLI::App* cmd = app.get_subcommands().front();
  if (cmd->count("--seed")) ov.seed = seed;
  if (cmd->count("--iters")) ov.iters = iters;
  if (cmd->count("--restarts")) ov.restarts = restarts;

  try {
    const fsoalloc::RunConfig cfg = fsoalloc::parse_config(config_path);
    if (train->parsed()) return fsoalloc::run_train(cfg, ov, out_dir);
    if (eval->parsed())
      return fsoalloc::run_eval(model_path, cfg, ov, out_dir, strict);
    if (permtest->parsed())
      return fsoalloc::run_permtest(model_path, cfg, ov, out_dir, perm_specs,
                                    n_random, n_samples, strict);
    if (baseline->parsed()) return fsoalloc::run_baseline(cfg, ov, out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
