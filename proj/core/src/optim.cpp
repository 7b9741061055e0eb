#include "fsoalloc/optim.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "fsoalloc/rng.hpp"

namespace fsoalloc {

void TrainConfig::validate() const {
  if (!(p_total > 0.0)) throw std::invalid_argument("TrainConfig: p_total must be > 0");
  if (!(p_peak > 0.0)) throw std::invalid_argument("TrainConfig: p_peak must be > 0");
  if (!(c_cap > 0.0)) throw std::invalid_argument("TrainConfig: c_cap must be > 0");
  if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
  if (iterations < 0) throw std::invalid_argument("TrainConfig: iterations must be >= 0");
  if (!(power_std_frac > 0.0))
    throw std::invalid_argument("TrainConfig: power_std_frac must be > 0");
  if (!(dual_step0 > 0.0)) throw std::invalid_argument("TrainConfig: dual_step0 must be > 0");
  if (!(dual_decay > 0.0 && dual_decay < 1.0))
    throw std::invalid_argument("TrainConfig: dual_decay must lie in (0,1)");
  if (lambda_init < 0.0)
    throw std::invalid_argument("TrainConfig: lambda_init must be >= 0");
}

RolloutSample make_rollout(const Topology& t, const ChannelMatrix& h,
                           const NodeSignal& x, const GnnParams& theta,
                           const TrainConfig& cfg, const FadingConfig& fading,
                           std::mt19937_64& rng) {
  RolloutSample s;
  s.h = h;
  const ShiftMatrix shift = build_shift(h);
  const Eigen::MatrixXd outputs = forward(x, shift, theta, &s.cache);
  s.policy = split_heads(outputs, t.n_rrh(), t.n_an(), cfg.p_peak,
                         cfg.power_std(), cfg.allow_idle);
  s.alloc = sample(s.policy, rng);
  s.objective = weighted_objective(t, h, s.alloc, fading);
  s.total_power = s.alloc.powers.sum();
  s.an_loads = per_an_load(h, s.alloc, fading);
  return s;
}

double lagrangian_reward(const RolloutSample& s, const DualVars& duals,
                         const TrainConfig& cfg) {
  double r = s.objective + duals.lambda[0] * (cfg.p_total - s.total_power);
  for (int m = 0; m < s.an_loads.size(); ++m)
    r += duals.lambda[m + 1] * (cfg.c_cap - s.an_loads[m]);
  return r;
}

LagrangianTerms lagrangian_terms(std::span<const RolloutSample> batch,
                                 const DualVars& duals, const TrainConfig& cfg) {
  if (batch.empty())
    throw std::invalid_argument("lagrangian_terms: empty batch");
  const int n_an = static_cast<int>(batch.front().an_loads.size());
  if (duals.lambda.size() != n_an + 1)
    throw std::invalid_argument("lagrangian_terms: dual size mismatch");

  double mean_obj = 0.0;
  double mean_power = 0.0;
  Eigen::VectorXd mean_loads = Eigen::VectorXd::Zero(n_an);
  for (const RolloutSample& s : batch) {
    mean_obj += s.objective;
    mean_power += s.total_power;
    mean_loads += s.an_loads;
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  mean_obj *= inv;
  mean_power *= inv;
  mean_loads *= inv;

  LagrangianTerms terms;
  terms.objective = mean_obj;
  terms.power_term = duals.lambda[0] * (cfg.p_total - mean_power);
  terms.congestion_terms =
      duals.lambda.tail(n_an).cwiseProduct(
          (cfg.c_cap - mean_loads.array()).matrix());
  terms.total = terms.objective + terms.power_term + terms.congestion_terms.sum();
  return terms;
}

GnnParams policy_gradient(std::span<const RolloutSample> batch,
                          const GnnParams& theta, const DualVars& duals,
                          const TrainConfig& cfg) {
  if (batch.empty())
    throw std::invalid_argument("policy_gradient: empty batch");

  double reward_baseline = 0.0;
  if (cfg.baseline_subtract) {
    for (const RolloutSample& s : batch) reward_baseline += lagrangian_reward(s, duals, cfg);
    reward_baseline /= static_cast<double>(batch.size());
  }

  GnnParams grad(theta.config());
  for (const RolloutSample& s : batch) {
    const double reward = lagrangian_reward(s, duals, cfg) - reward_baseline;
    PolicyGrad pg = log_prob_grad(s.policy, s.alloc);
    pg.d_power_means *= reward;
    pg.d_selection_logits *= reward;
    const Eigen::MatrixXd out_grad = split_heads_backward(
        s.cache.outputs, s.policy.n_rrh(), s.policy.n_an(), s.policy.p_peak, pg);
    const GnnParams sample_grad = backward(s.cache, theta, out_grad);
    for (std::size_t i = 0; i < grad.size(); ++i)
      grad.flat()[i] += sample_grad.flat()[i];
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (double& v : grad.flat()) v *= inv;
  return grad;
}

void primal_step(GnnParams& theta, const GnnParams& grad, AdamState& state,
                 const AdamConfig& cfg) {
  if (grad.size() != theta.size())
    throw std::invalid_argument("primal_step: gradient shape mismatch");
  if (state.step == 0) {
    state.m = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(theta.size()));
    state.v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(theta.size()));
  }
  for (std::size_t i = 0; i < grad.size(); ++i)
    if (!std::isfinite(grad.flat()[i]))
      throw std::runtime_error("primal_step: non-finite gradient component " +
                               std::to_string(i));

  state.step += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  auto th = theta.flat();
  auto g = grad.flat();
  for (std::size_t i = 0; i < th.size(); ++i) {
    const auto ei = static_cast<Eigen::Index>(i);
    state.m[ei] = cfg.beta1 * state.m[ei] + (1.0 - cfg.beta1) * g[i];
    state.v[ei] = cfg.beta2 * state.v[ei] + (1.0 - cfg.beta2) * g[i] * g[i];
    const double m_hat = state.m[ei] / bc1;
    const double v_hat = state.v[ei] / bc2;
    // Ascent: the Lagrangian is maximized over theta.
    th[i] += cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
  }
}

void dual_step(DualVars& duals, double mean_total_power,
               const Eigen::VectorXd& mean_loads, double eta,
               const TrainConfig& cfg) {
  if (!(eta > 0.0)) throw std::invalid_argument("dual_step: eta must be > 0");
  if (duals.lambda.size() != mean_loads.size() + 1)
    throw std::invalid_argument("dual_step: dual size mismatch");
  duals.lambda[0] =
      std::max(0.0, duals.lambda[0] - eta * (cfg.p_total - mean_total_power));
  for (int m = 0; m < mean_loads.size(); ++m)
    duals.lambda[m + 1] =
        std::max(0.0, duals.lambda[m + 1] - eta * (cfg.c_cap - mean_loads[m]));
}

TrainResult train(const TrainConfig& cfg, const Topology& t,
                  const FadingConfig& fading, const GnnConfig& gnn_cfg) {
  cfg.validate();
  fading.validate();
  gnn_cfg.validate();
  if (gnn_cfg.output_features != t.n_an() + 1)
    throw std::invalid_argument("train: gnn output_features must equal n_an + 1");

  GnnParams theta = GnnParams::init(gnn_cfg, cfg.train_seed);
  DualVars duals = DualVars::zeros(t.n_an());
  duals.lambda.setConstant(cfg.lambda_init);
  AdamState adam;
  TrainMetrics metrics;
  metrics.reserve(static_cast<std::size_t>(cfg.iterations));

  auto rng = seeded_rng(cfg.train_seed, 0x726f6c6c6f757421ULL);
  const NodeSignal x = default_node_state(t.n_rrh(), t.n_an());

  for (int k = 0; k < cfg.iterations; ++k) {
    std::vector<RolloutSample> batch;
    batch.reserve(static_cast<std::size_t>(cfg.batch_size));
    for (int b = 0; b < cfg.batch_size; ++b) {
      const ChannelMatrix h = sample_csi(t, fading, rng);
      batch.push_back(make_rollout(t, h, x, theta, cfg, fading, rng));
    }

    const LagrangianTerms terms = lagrangian_terms(batch, duals, cfg);
    if (!std::isfinite(terms.total))
      throw std::runtime_error("train: non-finite Lagrangian at iteration " +
                               std::to_string(k));

    double mean_power = 0.0;
    Eigen::VectorXd mean_loads = Eigen::VectorXd::Zero(t.n_an());
    for (const RolloutSample& s : batch) {
      mean_power += s.total_power;
      mean_loads += s.an_loads;
    }
    mean_power /= static_cast<double>(cfg.batch_size);
    mean_loads /= static_cast<double>(cfg.batch_size);

    IterationRecord rec;
    rec.iter = k;
    rec.objective = terms.objective;
    rec.lagrangian = terms.total;
    rec.lambda = duals.lambda;
    rec.power_slack = cfg.p_total - mean_power;
    rec.congestion_slack = (cfg.c_cap - mean_loads.array()).matrix();
    metrics.push_back(std::move(rec));

    const GnnParams grad = policy_gradient(batch, theta, duals, cfg);
    primal_step(theta, grad, adam, cfg.adam);

    const double eta = cfg.dual_step0 * std::pow(cfg.dual_decay, k);
    dual_step(duals, mean_power, mean_loads, eta, cfg);
    if ((duals.lambda.array() < 0.0).any())
      throw std::runtime_error("train: negative dual at iteration " +
                               std::to_string(k));
  }

  return TrainResult{std::move(theta), std::move(duals), std::move(metrics)};
}

TrainResult train_best_of(const TrainConfig& cfg, const Topology& t,
                          const FadingConfig& fading, const GnnConfig& gnn_cfg,
                          int restarts) {
  if (restarts < 1) throw std::invalid_argument("train_best_of: restarts must be >= 1");
  TrainResult best{GnnParams(gnn_cfg), DualVars::zeros(t.n_an()), {}};
  double best_score = -std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    TrainConfig run_cfg = cfg;
    run_cfg.train_seed = cfg.train_seed + static_cast<std::uint64_t>(r);
    TrainResult res = train(run_cfg, t, fading, gnn_cfg);

    // Tail window: mean objective over the last 10% of iterations, with
    // feasibility violations penalized so an infeasible run never wins.
    double score = 0.0;
    if (!res.metrics.empty()) {
      const std::size_t window =
          std::max<std::size_t>(1, res.metrics.size() / 10);
      double obj = 0.0, pviol = 0.0, cviol = 0.0;
      for (std::size_t i = res.metrics.size() - window; i < res.metrics.size(); ++i) {
        obj += res.metrics[i].objective;
        pviol += std::max(0.0, -res.metrics[i].power_slack);
        cviol += std::max(0.0, -res.metrics[i].congestion_slack.minCoeff());
      }
      const double w = static_cast<double>(window);
      score = obj / w - 1e3 * (pviol / w / cfg.p_total + cviol / w / cfg.c_cap);
    }
    if (score > best_score) {
      best_score = score;
      best = std::move(res);
    }
  }
  return best;
}

}  // namespace fsoalloc
