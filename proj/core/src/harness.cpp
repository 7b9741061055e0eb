#include "fsoalloc/harness.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fsoalloc/rng.hpp"
#include "fsoalloc/stats.hpp"

namespace fsoalloc {

namespace {

struct RunningStats {
  double sum = 0.0;
  double sum_sq = 0.0;
  long n = 0;

  void add(double x) {
    sum += x;
    sum_sq += x * x;
    n += 1;
  }
  double mean() const { return n > 0 ? sum / static_cast<double>(n) : 0.0; }
  double se() const {
    if (n < 2) return 0.0;
    const double m = mean();
    const double var =
        std::max(0.0, (sum_sq - static_cast<double>(n) * m * m) /
                          static_cast<double>(n - 1));
    return std::sqrt(var / static_cast<double>(n));
  }
};

struct ModeAccumulator {
  RunningStats objective;
  double power_sum = 0.0;
  Eigen::VectorXd load_sum;

  explicit ModeAccumulator(int n_an) : load_sum(Eigen::VectorXd::Zero(n_an)) {}

  void add(double obj, double power, const Eigen::VectorXd& loads) {
    objective.add(obj);
    power_sum += power;
    load_sum += loads;
  }

  EvalModeReport finish(const TrainConfig& cfg, double tol_frac) const {
    EvalModeReport r;
    const double n = static_cast<double>(objective.n);
    r.objective_mean = objective.mean();
    r.objective_se = objective.se();
    r.power_mean = power_sum / n;
    r.an_load_mean = load_sum / n;
    r.power_feasible = r.power_mean <= cfg.p_total * (1.0 + tol_frac);
    r.congestion_feasible =
        (r.an_load_mean.array() <= cfg.c_cap * (1.0 + tol_frac)).all();
    return r;
  }
};

PolicyParams policy_at(const GnnParams& theta, const Topology& t,
                       const ChannelMatrix& h, const TrainConfig& cfg) {
  const ShiftMatrix s = build_shift(h);
  const NodeSignal x = default_node_state(t.n_rrh(), t.n_an());
  const Eigen::MatrixXd outputs = forward(x, s, theta, nullptr);
  return split_heads(outputs, t.n_rrh(), t.n_an(), cfg.p_peak, cfg.power_std(),
                     cfg.allow_idle);
}

}  // namespace

Allocation baseline_alloc(const Topology& t, const TrainConfig& cfg,
                          std::mt19937_64& rng) {
  cfg.validate();
  Allocation a;
  const double p = std::min(cfg.p_total / static_cast<double>(t.n_rrh()), cfg.p_peak);
  a.powers = Eigen::VectorXd::Constant(t.n_rrh(), p);
  a.selections.resize(static_cast<std::size_t>(t.n_rrh()));
  std::uniform_int_distribution<int> pick(0, t.n_an() - 1);
  for (int n = 0; n < t.n_rrh(); ++n) a.selections[static_cast<std::size_t>(n)] = pick(rng);
  return a;
}

Allocation mean_action(const PolicyParams& params) {
  Allocation a;
  a.powers = params.power_means;
  a.selections.resize(static_cast<std::size_t>(params.n_rrh()));
  for (int n = 0; n < params.n_rrh(); ++n) {
    int best = 0;
    double best_logit = params.selection_logits(n, 0);
    for (int m = 1; m < params.n_an(); ++m) {
      if (params.selection_logits(n, m) > best_logit) {
        best_logit = params.selection_logits(n, m);
        best = m;
      }
    }
    if (params.allow_idle && best_logit < 0.0) best = params.n_an();
    a.selections[static_cast<std::size_t>(n)] = best;
  }
  return a;
}

EvalReport evaluate(const GnnParams& theta, const Topology& t,
                    const FadingConfig& fading, const TrainConfig& cfg,
                    int n_samples, std::uint64_t seed, double feas_tol_frac) {
  if (n_samples < 1) throw std::invalid_argument("evaluate: n_samples must be >= 1");
  auto csi_rng = seeded_rng(seed, 1);
  auto act_rng = seeded_rng(seed, 2);

  ModeAccumulator mean_acc(t.n_an());
  ModeAccumulator stoch_acc(t.n_an());
  for (int i = 0; i < n_samples; ++i) {
    const ChannelMatrix h = sample_csi(t, fading, csi_rng);
    const PolicyParams params = policy_at(theta, t, h, cfg);

    const Allocation det = mean_action(params);
    mean_acc.add(weighted_objective(t, h, det, fading), det.powers.sum(),
                 per_an_load(h, det, fading));

    const Allocation stoch = sample(params, act_rng);
    stoch_acc.add(weighted_objective(t, h, stoch, fading), stoch.powers.sum(),
                  per_an_load(h, stoch, fading));
  }

  EvalReport report;
  report.mean_mode = mean_acc.finish(cfg, feas_tol_frac);
  report.stochastic_mode = stoch_acc.finish(cfg, feas_tol_frac);
  report.n_samples = n_samples;
  report.feas_tol_frac = feas_tol_frac;
  return report;
}

EvalModeReport evaluate_baseline(const Topology& t, const FadingConfig& fading,
                                 const TrainConfig& cfg, int n_samples,
                                 std::uint64_t seed, double feas_tol_frac) {
  if (n_samples < 1)
    throw std::invalid_argument("evaluate_baseline: n_samples must be >= 1");
  auto csi_rng = seeded_rng(seed, 1);
  auto act_rng = seeded_rng(seed, 2);
  ModeAccumulator acc(t.n_an());
  for (int i = 0; i < n_samples; ++i) {
    const ChannelMatrix h = sample_csi(t, fading, csi_rng);
    const Allocation a = baseline_alloc(t, cfg, act_rng);
    acc.add(weighted_objective(t, h, a, fading), a.powers.sum(),
            per_an_load(h, a, fading));
  }
  return acc.finish(cfg, feas_tol_frac);
}

Topology permute_topology(const PermutationMap& p, const Topology& t) {
  if (!p.class_preserving(t.n_rrh(), t.n_an()))
    throw std::invalid_argument("permute_topology: map must preserve RRH/AN classes");
  Topology out;
  out.rrh_positions.resize(t.n_rrh(), 2);
  out.an_positions.resize(t.n_an(), 2);
  out.weights.resize(t.n_rrh());
  for (int n = 0; n < t.n_rrh(); ++n) {
    out.rrh_positions.row(n) = t.rrh_positions.row(p[n]);
    out.weights[n] = t.weights[p[n]];
  }
  for (int m = 0; m < t.n_an(); ++m)
    out.an_positions.row(m) = t.an_positions.row(p[t.n_rrh() + m] - t.n_rrh());
  return out;
}

ChannelMatrix permute_channel(const PermutationMap& p, const ChannelMatrix& h,
                              int n_rrh, int n_an) {
  if (!p.class_preserving(n_rrh, n_an))
    throw std::invalid_argument("permute_channel: map must preserve RRH/AN classes");
  Eigen::MatrixXd g(n_rrh, n_an);
  for (int n = 0; n < n_rrh; ++n)
    for (int m = 0; m < n_an; ++m) g(n, m) = h.gains(p[n], p[n_rrh + m] - n_rrh);
  return ChannelMatrix{std::move(g)};
}

PermTestReport permutation_test(const GnnParams& theta, const Topology& t,
                                const FadingConfig& fading,
                                const TrainConfig& cfg,
                                std::span<const PermutationMap> perms,
                                int n_samples, std::uint64_t seed) {
  if (n_samples < 1)
    throw std::invalid_argument("permutation_test: n_samples must be >= 1");
  for (const PermutationMap& p : perms)
    if (!p.class_preserving(t.n_rrh(), t.n_an()))
      throw std::invalid_argument(
          "permutation_test: map must preserve RRH/AN classes");

  PermTestReport report;
  report.n_samples = n_samples;

  // Coupled mode: one set of draws, every network sees the same channels.
  std::vector<ChannelMatrix> draws;
  draws.reserve(static_cast<std::size_t>(n_samples));
  {
    auto rng = seeded_rng(seed, 10);
    for (int i = 0; i < n_samples; ++i) draws.push_back(sample_csi(t, fading, rng));
  }

  auto coupled_objective = [&](const Topology& net, auto&& channel_of) {
    double acc = 0.0;
    for (int i = 0; i < n_samples; ++i) {
      const ChannelMatrix h = channel_of(i);
      const PolicyParams params = policy_at(theta, net, h, cfg);
      const Allocation a = mean_action(params);
      acc += weighted_objective(net, h, a, fading);
    }
    return acc / static_cast<double>(n_samples);
  };

  report.original_objective = coupled_objective(
      t, [&](int i) -> const ChannelMatrix& { return draws[static_cast<std::size_t>(i)]; });

  auto independent_objective = [&](const Topology& net, std::uint64_t stream) {
    auto rng = seeded_rng(seed, stream);
    double acc = 0.0;
    for (int i = 0; i < n_samples; ++i) {
      const ChannelMatrix h = sample_csi(net, fading, rng);
      const PolicyParams params = policy_at(theta, net, h, cfg);
      const Allocation a = mean_action(params);
      acc += weighted_objective(net, h, a, fading);
    }
    return acc / static_cast<double>(n_samples);
  };

  report.original_independent = independent_objective(t, 100);

  double ind_min = report.original_independent;
  double ind_max = report.original_independent;
  double ind_sum = report.original_independent;
  for (std::size_t pi = 0; pi < perms.size(); ++pi) {
    const PermutationMap& p = perms[pi];
    const Topology tp = permute_topology(p, t);

    PermTestEntry entry;
    entry.name = "perm_" + std::to_string(pi + 1);
    entry.coupled_objective = coupled_objective(tp, [&](int i) {
      return permute_channel(p, draws[static_cast<std::size_t>(i)], t.n_rrh(), t.n_an());
    });
    entry.coupled_rel_diff =
        std::abs(entry.coupled_objective - report.original_objective) /
        std::max(std::abs(report.original_objective), 1e-300);
    entry.independent_objective = independent_objective(tp, 101 + pi);

    ind_min = std::min(ind_min, entry.independent_objective);
    ind_max = std::max(ind_max, entry.independent_objective);
    ind_sum += entry.independent_objective;
    report.coupled_max_rel_diff =
        std::max(report.coupled_max_rel_diff, entry.coupled_rel_diff);
    report.entries.push_back(std::move(entry));
  }

  const double ind_mean = ind_sum / static_cast<double>(perms.size() + 1);
  report.independent_rel_spread =
      ind_mean != 0.0 ? (ind_max - ind_min) / std::abs(ind_mean) : 0.0;
  return report;
}

}  // namespace fsoalloc
