// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Heavier end-to-end checks (training runs) live here rather than in
// the unit suites.

#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "fsoalloc/channel.hpp"
#include "fsoalloc/gnn.hpp"
#include "fsoalloc/graph.hpp"
#include "fsoalloc/harness.hpp"
#include "fsoalloc/optim.hpp"
#include "fsoalloc/policy.hpp"
#include "fsoalloc/rng.hpp"
#include "oracles.hpp"

using namespace fsoalloc;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

ChannelMatrix random_channel(int n, int m, std::uint64_t seed) {
  auto rng = seeded_rng(seed);
  std::uniform_real_distribution<double> unif(0.05, 1.0);
  Eigen::MatrixXd g(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) g(i, j) = unif(rng);
  return ChannelMatrix::make(std::move(g));
}

NodeSignal random_signal(int n, std::uint64_t seed) {
  auto rng = seeded_rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  NodeSignal x(n);
  for (int i = 0; i < n; ++i) x[i] = unif(rng);
  return x;
}

Eigen::MatrixXd permute_rows(const PermutationMap& p, const Eigen::MatrixXd& m) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (int i = 0; i < m.rows(); ++i) out.row(i) = m.row(p[i]);
  return out;
}

TrainConfig reference_train_config() {
  TrainConfig cfg;
  cfg.p_total = 1.5;
  cfg.p_peak = 0.5;
  cfg.c_cap = 20.0;
  cfg.batch_size = 32;
  cfg.iterations = 6000;
  cfg.train_seed = 7;
  return cfg;
}

// ---------------------------------------------------------------------------
// Criterion 1: permutation equivariance of the forward map.
Outcome criterion_equivariance() {
  double worst = 0.0;
  auto rng = seeded_rng(1001);
  int instance = 0;
  for (auto [n, m] : {std::pair{5, 2}, std::pair{10, 4}}) {
    const GnnConfig cfg{8, 1, 5, m + 1};
    for (int trial = 0; trial < 100; ++trial, ++instance) {
      const auto seed = static_cast<std::uint64_t>(instance);
      const GnnParams theta = GnnParams::init(cfg, 5000 + seed);
      const ShiftMatrix s = build_shift(random_channel(n, m, 6000 + seed));
      const NodeSignal x = random_signal(n + m, 7000 + seed);
      const auto p = PermutationMap::random_class_preserving(n, m, rng);

      const Eigen::MatrixXd lhs =
          forward(permute_signal(p, x), permute_shift(p, s), theta);
      const Eigen::MatrixXd rhs = permute_rows(p, forward(x, s, theta));
      worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "max |forward(Pi x, Pi S Pi^T) - Pi forward| = %.3e over 200 "
                "instances (tol 1e-10)",
                worst);
  return {worst < 1e-10, buf};
}

// ---------------------------------------------------------------------------
// Criterion 2: reverse-mode and score gradients against finite differences.
Outcome criterion_gradients() {
  double worst_gnn = 0.0;
  // gnn.backward on 50 instances with pre-activations off the rectifier kink.
  {
    const GnnConfig cfg{3, 2, 2, 3};
    int done = 0;
    auto rng = seeded_rng(2001);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (std::uint64_t seed = 0; done < 50 && seed < 2000; ++seed) {
      const GnnParams theta = GnnParams::init(cfg, 8000 + seed);
      const ShiftMatrix s = build_shift(random_channel(3, 2, 9000 + seed));
      const NodeSignal x = random_signal(5, 10000 + seed);
      ForwardCache cache;
      forward(x, s, theta, &cache);
      double kink_gap = std::numeric_limits<double>::infinity();
      for (int l = 0; l + 1 < cfg.n_layers; ++l)
        for (const NodeSignal& u : cache.layers[static_cast<std::size_t>(l)].pre)
          kink_gap = std::min(kink_gap, u.cwiseAbs().minCoeff());
      if (kink_gap <= 1e-3) continue;
      ++done;

      Eigen::MatrixXd out_grad(5, 3);
      for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 3; ++j) out_grad(i, j) = unif(rng);
      const GnnParams got = backward(cache, theta, out_grad);
      for (std::size_t i = 0; i < theta.size(); ++i) {
        GnnParams plus = theta, minus = theta;
        plus.flat()[i] += 1e-5;
        minus.flat()[i] -= 1e-5;
        const double fp = (out_grad.array() * forward(x, s, plus).array()).sum();
        const double fm = (out_grad.array() * forward(x, s, minus).array()).sum();
        const double fd = (fp - fm) / 2e-5;
        worst_gnn = std::max(worst_gnn, std::abs(got.flat()[i] - fd) /
                                            std::max(std::abs(fd), 1e-8));
      }
    }
    if (done < 50) return {false, "could not build 50 off-kink instances"};
  }

  // policy.log_prob_grad on 50 random instances.
  double worst_policy = 0.0;
  {
    auto rng = seeded_rng(2002);
    std::uniform_real_distribution<double> mean_d(0.05, 0.45);
    std::uniform_real_distribution<double> lg(-2.5, 2.5);
    std::uniform_real_distribution<double> pw(0.01, 0.49);
    for (int trial = 0; trial < 50; ++trial) {
      PolicyParams p;
      p.power_means = Eigen::VectorXd(3);
      p.power_means << mean_d(rng), mean_d(rng), mean_d(rng);
      p.selection_logits.resize(3, 2);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 2; ++j) p.selection_logits(i, j) = lg(rng);
      p.power_std = 0.08;
      p.p_peak = 0.5;
      Allocation a;
      a.powers = Eigen::VectorXd(3);
      a.powers << pw(rng), pw(rng), pw(rng);
      a.selections = {static_cast<int>(rng() % 2), static_cast<int>(rng() % 2),
                      static_cast<int>(rng() % 2)};
      const PolicyGrad g = log_prob_grad(p, a);
      for (int n = 0; n < 3; ++n) {
        const double fd_mean = oracle::central_diff(
            [&](double d) {
              PolicyParams q = p;
              q.power_means[n] += d;
              return log_prob(q, a);
            },
            1e-5);
        worst_policy =
            std::max(worst_policy, std::abs(g.d_power_means[n] - fd_mean) /
                                       std::max(std::abs(fd_mean), 1e-8));
        for (int m = 0; m < 2; ++m) {
          const double fd_logit = oracle::central_diff(
              [&](double d) {
                PolicyParams q = p;
                q.selection_logits(n, m) += d;
                return log_prob(q, a);
              },
              1e-5);
          worst_policy = std::max(
              worst_policy, std::abs(g.d_selection_logits(n, m) - fd_logit) /
                                std::max(std::abs(fd_logit), 1e-8));
        }
      }
    }
  }

  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "max rel err: gnn.backward %.3e, log_prob_grad %.3e (tol 1e-5)",
                worst_gnn, worst_policy);
  return {worst_gnn < 1e-5 && worst_policy < 1e-5, buf};
}

// ---------------------------------------------------------------------------
// Criterion 3: score-function estimate of the Lagrangian gradient is
// unbiased on a one-RRH/two-AN toy with a deterministic channel.
Outcome criterion_score_function() {
  // Fixed setup: deterministic channel, all Lagrangian terms active.
  Topology t;
  t.rrh_positions.resize(1, 2);
  t.rrh_positions << 2.0, 1.0;
  t.an_positions.resize(2, 2);
  t.an_positions << 0.5, -0.5, -0.8, 0.3;
  t.weights = Eigen::VectorXd::Constant(1, 0.8);
  FadingConfig fading;
  fading.lognormal_sigma = 0.0;

  TrainConfig cfg = reference_train_config();
  cfg.power_std_frac = 0.16;  // std 0.08
  DualVars duals = DualVars::zeros(2);
  duals.lambda << 0.3, 0.2, 0.1;

  const GnnConfig gcfg{8, 1, 5, 3};
  const GnnParams theta = GnnParams::init(gcfg, 4242);
  auto csi_rng = seeded_rng(3001);
  const ChannelMatrix h = sample_csi(t, fading, csi_rng);
  const NodeSignal x = default_node_state(1, 2);
  const ShiftMatrix shift = build_shift(h);

  // Lagrangian reward of an action under the deterministic channel.
  auto reward = [&](double power, int sel) {
    Allocation a;
    a.powers = Eigen::VectorXd::Constant(1, power);
    a.selections = {sel};
    double r = weighted_objective(t, h, a, fading) +
               duals.lambda[0] * (cfg.p_total - power);
    const Eigen::VectorXd loads = per_an_load(h, a, fading);
    for (int m = 0; m < 2; ++m) r += duals.lambda[m + 1] * (cfg.c_cap - loads[m]);
    return r;
  };

  // Sample-exact expectation of the reward as a function of theta, through
  // quadrature and category enumeration (no library distributions involved).
  auto exact_expectation = [&](const GnnParams& th) {
    const Eigen::MatrixXd outputs = forward(x, shift, th);
    const PolicyParams pol = split_heads(outputs, 1, 2, cfg.p_peak, cfg.power_std());
    return oracle::expect_single_rrh(
        reward, pol.power_means[0], pol.power_std, pol.p_peak,
        {pol.selection_logits(0, 0), pol.selection_logits(0, 1)});
  };

  // Finite-difference gradient of the exact expectation.
  const std::size_t dim = theta.size();
  std::vector<double> fd(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    GnnParams plus = theta, minus = theta;
    plus.flat()[i] += 1e-5;
    minus.flat()[i] -= 1e-5;
    fd[i] = (exact_expectation(plus) - exact_expectation(minus)) / 2e-5;
  }

  // Monte-Carlo score-function estimate of the same gradient.
  ForwardCache cache;
  const Eigen::MatrixXd outputs = forward(x, shift, theta, &cache);
  const PolicyParams pol = split_heads(outputs, 1, 2, cfg.p_peak, cfg.power_std());
  auto rng = seeded_rng(3002);
  const int draws = 200000;
  std::vector<double> sum(dim, 0.0), sumsq(dim, 0.0);
  for (int it = 0; it < draws; ++it) {
    const Allocation a = sample(pol, rng);
    const double r = reward(a.powers[0], a.selections[0]);
    PolicyGrad pg = log_prob_grad(pol, a);
    pg.d_power_means *= r;
    pg.d_selection_logits *= r;
    const Eigen::MatrixXd out_grad =
        split_heads_backward(outputs, 1, 2, cfg.p_peak, pg);
    const GnnParams g = backward(cache, theta, out_grad);
    for (std::size_t i = 0; i < dim; ++i) {
      sum[i] += g.flat()[i];
      sumsq[i] += g.flat()[i] * g.flat()[i];
    }
  }

  double worst_z = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < dim; ++i) scale = std::max(scale, std::abs(fd[i]));
  for (std::size_t i = 0; i < dim; ++i) {
    const double mc = sum[i] / draws;
    const double var = std::max(0.0, sumsq[i] / draws - mc * mc);
    const double se = std::sqrt(var / draws);
    // Components with negligible gradient and variance are exact zeros on
    // both sides; guard the ratio with a small absolute floor.
    const double z = std::abs(mc - fd[i]) / std::max(3.0 * se, 1e-9 * scale);
    worst_z = std::max(worst_z, z * 3.0);
  }

  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "max |MC - FD| = %.2f standard errors over %zu components "
                "(tol 3 SE, %d draws)",
                worst_z, dim, draws);
  return {worst_z < 3.0, buf};
}

// ---------------------------------------------------------------------------
// Criteria 4/5: end-to-end training beats the baseline and lands feasible.
struct EndToEnd {
  Outcome outcome;
  TrainResult result;
  Topology topology;
  TrainConfig cfg;
};

EndToEnd run_end_to_end(const char* label, int n_rrh, int n_an, double p_total,
                        double p_peak, std::uint64_t topo_seed) {
  TrainConfig cfg = reference_train_config();
  cfg.p_total = p_total;
  cfg.p_peak = p_peak;
  const FadingConfig fading;
  const GnnConfig gcfg{8, 1, 5, n_an + 1};
  const Topology t = sample_topology(n_rrh, n_an, topo_seed);

  TrainResult result = train_best_of(cfg, t, fading, gcfg, 3);

  const EvalReport eval = evaluate(result.theta, t, fading, cfg, 10000, 90001);
  const EvalModeReport base = evaluate_baseline(t, fading, cfg, 10000, 90002);

  const double gain = eval.stochastic_mode.objective_mean /
                      std::max(base.objective_mean, 1e-12);
  const bool beats = gain >= 1.10;
  const bool power_ok =
      eval.stochastic_mode.power_mean <= cfg.p_total * 1.02;
  const bool cong_ok =
      (eval.stochastic_mode.an_load_mean.array() <= cfg.c_cap * 1.02).all();

  char buf[240];
  std::snprintf(buf, sizeof(buf),
                "%s: policy %.4f vs baseline %.4f (x%.3f, need >= x1.10), "
                "E[sum P] %.4f <= %.4f: %s, max load %.4f <= %.4f: %s",
                label, eval.stochastic_mode.objective_mean, base.objective_mean,
                gain, eval.stochastic_mode.power_mean, cfg.p_total * 1.02,
                power_ok ? "yes" : "NO",
                eval.stochastic_mode.an_load_mean.maxCoeff(), cfg.c_cap * 1.02,
                cong_ok ? "yes" : "NO");
  return {{beats && power_ok && cong_ok, buf}, std::move(result), t, cfg};
}

// Parameter-shape invariance for the scaled network.
Outcome criterion_param_invariance() {
  const GnnConfig cfg_m4{8, 1, 5, 5};
  const std::size_t expected =
      static_cast<std::size_t>((1 + 6 * 1 + 5) * 6);  // layers 1..8, K+1 = 6
  const GnnParams theta = GnnParams::init(cfg_m4, 77);
  bool ok = cfg_m4.param_count() == expected && theta.size() == expected;

  // The same parameter object evaluates on different network sizes.
  const ShiftMatrix s10 = build_shift(random_channel(10, 4, 1));
  const ShiftMatrix s7 = build_shift(random_channel(7, 4, 2));
  const Eigen::MatrixXd o10 = forward(random_signal(14, 3), s10, theta);
  const Eigen::MatrixXd o7 = forward(random_signal(11, 4), s7, theta);
  ok = ok && o10.rows() == 14 && o7.rows() == 11 && o10.cols() == 5;

  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "param count %zu == closed form %zu, independent of N "
                "(evaluated at N=10 and N=7)",
                theta.size(), expected);
  return {ok, buf};
}

// ---------------------------------------------------------------------------
// Criterion 6: permutation experiment on the trained reference policy.
Outcome criterion_permutation(const TrainResult& trained, const Topology& t,
                              const TrainConfig& cfg) {
  const FadingConfig fading;
  std::vector<PermutationMap> perms{
      PermutationMap({2, 3, 4, 1, 0, 5, 6}),
      PermutationMap({1, 0, 4, 3, 2, 6, 5})};
  auto rng = seeded_rng(6001);
  for (int i = 0; i < 20; ++i)
    perms.push_back(PermutationMap::random_class_preserving(5, 2, rng));

  const PermTestReport report =
      permutation_test(trained.theta, t, fading, cfg, perms, 100, 6002);

  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "coupled max rel diff %.3e (tol 1e-9) over %zu maps; "
                "independent spread %.3f%% over 100 draws (tol 1%%)",
                report.coupled_max_rel_diff, perms.size(),
                100.0 * report.independent_rel_spread);
  return {report.coupled_max_rel_diff < 1e-9 &&
              report.independent_rel_spread < 0.01,
          buf};
}

// ---------------------------------------------------------------------------
// Criterion 7: sampled allocations never violate the built-in constraints.
Outcome criterion_feasibility() {
  const Topology t = sample_topology(5, 2, 71);
  const FadingConfig fading;
  TrainConfig cfg = reference_train_config();
  const GnnConfig gcfg{8, 1, 5, 3};

  long violations = 0;
  long total = 0;
  auto rng = seeded_rng(7001);
  const int n_params = 10;
  const int n_csi = 100;
  const int n_actions = 1000;
  for (int pi = 0; pi < n_params; ++pi) {
    // Mix freshly initialized and aggressively scaled parameters.
    GnnParams theta = GnnParams::init(gcfg, 7100 + static_cast<std::uint64_t>(pi));
    if (pi % 2 == 1)
      for (double& v : theta.flat()) v *= 12.0;
    for (int ci = 0; ci < n_csi; ++ci) {
      const ChannelMatrix h = sample_csi(t, fading, rng);
      const ShiftMatrix s = build_shift(h);
      const Eigen::MatrixXd outputs = forward(default_node_state(5, 2), s, theta);
      const PolicyParams pol =
          split_heads(outputs, 5, 2, cfg.p_peak, cfg.power_std());
      for (int ai = 0; ai < n_actions; ++ai) {
        const Allocation a = sample(pol, rng);
        ++total;
        for (int n = 0; n < 5; ++n) {
          const bool power_ok = a.powers[n] >= 0.0 && a.powers[n] <= cfg.p_peak;
          const int sel = a.selections[static_cast<std::size_t>(n)];
          const bool sel_ok = sel >= 0 && sel < 2;
          if (!power_ok || !sel_ok) ++violations;
        }
      }
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "%ld violations over %ld sampled allocations (5 RRHs each)",
                violations, total);
  return {violations == 0 && total == 1000000, buf};
}

// ---------------------------------------------------------------------------
// Criterion 8: dual variables stay nonnegative and vanish when slack.
Outcome criterion_duals(const TrainResult& reference_run) {
  bool nonneg = true;
  for (const IterationRecord& r : reference_run.metrics)
    if ((r.lambda.array() < 0.0).any()) nonneg = false;
  nonneg = nonneg && (reference_run.duals.lambda.array() >= 0.0).all();

  // Loose caps (10x) with a positive dual start: multipliers must decay.
  TrainConfig cfg = reference_train_config();
  cfg.p_total = 15.0;
  cfg.c_cap = 200.0;
  cfg.iterations = 2000;
  cfg.lambda_init = 1.0;
  const Topology t = sample_topology(5, 2, 81);
  const GnnConfig gcfg{8, 1, 5, 3};
  const TrainResult loose = train(cfg, t, FadingConfig{}, gcfg);
  bool loose_nonneg = true;
  for (const IterationRecord& r : loose.metrics)
    if ((r.lambda.array() < 0.0).any()) loose_nonneg = false;
  const double final_max = loose.duals.lambda.maxCoeff();

  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "lambda >= 0 at every iteration (reference%s, loose%s); loose-run "
                "final max lambda %.2e (tol 1e-3)",
                nonneg ? " yes" : " NO", loose_nonneg ? " yes" : " NO",
                final_max);
  return {nonneg && loose_nonneg && final_max < 1e-3, buf};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int idx, const char* name, const Outcome& o) {
    std::printf("[%s] criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", idx,
                name, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  };

  report(1, "equivariance", criterion_equivariance());
  report(2, "gradients", criterion_gradients());
  report(3, "score-function unbiasedness", criterion_score_function());

  EndToEnd small = run_end_to_end("N=5 M=2 P_t=1.5 P_s=0.5", 5, 2, 1.5, 0.5, 1);
  report(4, "end-to-end training", small.outcome);

  EndToEnd power = run_end_to_end("N=5 M=2 P_t=3.0 P_s=1.0", 5, 2, 3.0, 1.0, 1);
  EndToEnd large = run_end_to_end("N=10 M=4 P_t=1.5 P_s=0.5", 10, 4, 1.5, 0.5, 2);
  const Outcome invariance = criterion_param_invariance();
  {
    Outcome combined;
    combined.pass = power.outcome.pass && large.outcome.pass && invariance.pass;
    combined.detail = power.outcome.detail + "; " + large.outcome.detail + "; " +
                      invariance.detail;
    report(5, "scaling runs", combined);
  }

  report(6, "permutation experiment",
         criterion_permutation(small.result, small.topology, small.cfg));
  report(7, "feasibility by construction", criterion_feasibility());
  report(8, "dual dynamics", criterion_duals(small.result));

  std::printf("%d criterion(s) failed\n", failures);
  return failures;
}
