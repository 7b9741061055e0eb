#include "fsoalloc/gnn.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace fsoalloc {

namespace {

double sigmoid(double u) { return 1.0 / (1.0 + std::exp(-u)); }

constexpr double kLogitClamp = 1e-12;

double logit(double o) {
  const double c = std::clamp(o, kLogitClamp, 1.0 - kLogitClamp);
  return std::log(c / (1.0 - c));
}

}  // namespace

void GnnConfig::validate() const {
  if (n_layers < 1) throw std::invalid_argument("GnnConfig: n_layers must be >= 1");
  if (hidden_features < 1)
    throw std::invalid_argument("GnnConfig: hidden_features must be >= 1");
  if (filter_order < 0)
    throw std::invalid_argument("GnnConfig: filter_order must be >= 0");
  if (output_features < 1)
    throw std::invalid_argument("GnnConfig: output_features must be >= 1");
}

std::size_t GnnConfig::param_count() const {
  std::size_t count = 0;
  for (int l = 0; l < n_layers; ++l)
    count += static_cast<std::size_t>(in_features(l)) *
             static_cast<std::size_t>(out_features(l)) *
             static_cast<std::size_t>(n_taps());
  return count;
}

GnnParams::GnnParams(GnnConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  layer_offset_.resize(static_cast<std::size_t>(cfg_.n_layers));
  std::size_t off = 0;
  for (int l = 0; l < cfg_.n_layers; ++l) {
    layer_offset_[static_cast<std::size_t>(l)] = off;
    off += static_cast<std::size_t>(cfg_.in_features(l)) *
           static_cast<std::size_t>(cfg_.out_features(l)) *
           static_cast<std::size_t>(cfg_.n_taps());
  }
  taps_.assign(off, 0.0);
}

std::size_t GnnParams::flat_index(int layer, int f, int g, int k) const {
  const auto in = static_cast<std::size_t>(cfg_.in_features(layer));
  const auto taps = static_cast<std::size_t>(cfg_.n_taps());
  return layer_offset_[static_cast<std::size_t>(layer)] +
         (static_cast<std::size_t>(f) * in + static_cast<std::size_t>(g)) * taps +
         static_cast<std::size_t>(k);
}

GnnParams GnnParams::init(const GnnConfig& cfg, std::uint64_t seed) {
  GnnParams p(cfg);
  // Identity-plus-noise draw. A symmetric i.i.d. draw kills the rectifier
  // cascade on nonnegative node signals (the top filter order dominates the
  // pre-activation sign at every node simultaneously, so each hidden layer
  // dies w.p. ~1/2), and sub-unit scales contract the signal to ~0 over
  // depth. The order-0 tap is therefore drawn near 1 and the order-k
  // amplitudes decay geometrically against the shift-matrix gain.
  const double f_scale = 1.0 / static_cast<double>(cfg.hidden_features);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int l = 0; l < cfg.n_layers; ++l)
    for (int f = 0; f < cfg.out_features(l); ++f)
      for (int g = 0; g < cfg.in_features(l); ++g)
        for (int k = 0; k <= cfg.filter_order; ++k) {
          if (k == 0) {
            p.tap(l, f, g, 0) = f_scale * (0.65 + 0.3 * unif(rng));
          } else {
            const double amp = f_scale * 0.15 * std::pow(0.4, k - 1);
            p.tap(l, f, g, k) = amp * (2.0 * unif(rng) - 1.0);
          }
        }
  return p;
}

Eigen::MatrixXd forward(const NodeSignal& x, const ShiftMatrix& s,
                        const GnnParams& params, ForwardCache* cache) {
  const GnnConfig& cfg = params.config();
  if (x.size() != s.size())
    throw std::invalid_argument("gnn forward: signal length does not match shift size");
  if (!x.allFinite())
    throw std::invalid_argument("gnn forward: non-finite input signal");

  const int nodes = s.size();
  const int n_taps = cfg.n_taps();

  if (cache) {
    cache->shift = s;
    cache->input = x;
    cache->layers.clear();
    cache->layers.resize(static_cast<std::size_t>(cfg.n_layers));
  }

  std::vector<NodeSignal> features{x};
  for (int l = 0; l < cfg.n_layers; ++l) {
    const int in = cfg.in_features(l);
    const int out = cfg.out_features(l);
    const bool last = l == cfg.n_layers - 1;

    // S^k x^g for k = 0..K, shared across output features.
    std::vector<std::vector<NodeSignal>> shifted(static_cast<std::size_t>(in));
    for (int g = 0; g < in; ++g) {
      auto& zs = shifted[static_cast<std::size_t>(g)];
      zs.reserve(static_cast<std::size_t>(n_taps));
      zs.push_back(features[static_cast<std::size_t>(g)]);
      for (int k = 1; k < n_taps; ++k) zs.push_back(s.s * zs.back());
    }

    std::vector<NodeSignal> pre(static_cast<std::size_t>(out));
    std::vector<NodeSignal> post(static_cast<std::size_t>(out));
    for (int f = 0; f < out; ++f) {
      NodeSignal u = NodeSignal::Zero(nodes);
      for (int g = 0; g < in; ++g)
        for (int k = 0; k < n_taps; ++k)
          u.noalias() +=
              params.tap(l, f, g, k) * shifted[static_cast<std::size_t>(g)][static_cast<std::size_t>(k)];
      if (!u.allFinite())
        throw std::runtime_error("gnn forward: non-finite value at layer " +
                                 std::to_string(l + 1));
      pre[static_cast<std::size_t>(f)] = u;
      post[static_cast<std::size_t>(f)] =
          last ? u.unaryExpr([](double v) { return sigmoid(v); }).eval()
               : u.cwiseMax(0.0).eval();
    }

    if (cache) {
      cache->layers[static_cast<std::size_t>(l)].shifted = std::move(shifted);
      cache->layers[static_cast<std::size_t>(l)].pre = pre;
    }
    features = std::move(post);
  }

  Eigen::MatrixXd outputs(nodes, cfg.output_features);
  for (int f = 0; f < cfg.output_features; ++f)
    outputs.col(f) = features[static_cast<std::size_t>(f)];
  if (cache) cache->outputs = outputs;
  return outputs;
}

GnnParams backward(const ForwardCache& cache, const GnnParams& params,
                   const Eigen::MatrixXd& out_grad) {
  const GnnConfig& cfg = params.config();
  if (cache.layers.size() != static_cast<std::size_t>(cfg.n_layers))
    throw std::invalid_argument("gnn backward: cache does not match config");
  if (out_grad.rows() != cache.shift.size() ||
      out_grad.cols() != cfg.output_features)
    throw std::invalid_argument("gnn backward: out_grad shape mismatch");

  const int n_taps = cfg.n_taps();
  GnnParams grad(cfg);

  // Gradient w.r.t. the post-activations of the current layer, one column
  // per output feature.
  std::vector<NodeSignal> grad_post(static_cast<std::size_t>(cfg.output_features));
  for (int f = 0; f < cfg.output_features; ++f) grad_post[static_cast<std::size_t>(f)] = out_grad.col(f);

  for (int l = cfg.n_layers - 1; l >= 0; --l) {
    const auto& layer = cache.layers[static_cast<std::size_t>(l)];
    const int in = cfg.in_features(l);
    const int out = cfg.out_features(l);
    const bool last = l == cfg.n_layers - 1;

    std::vector<NodeSignal> grad_pre(static_cast<std::size_t>(out));
    for (int f = 0; f < out; ++f) {
      const NodeSignal& u = layer.pre[static_cast<std::size_t>(f)];
      NodeSignal d(u.size());
      if (last) {
        for (int i = 0; i < u.size(); ++i) {
          const double sv = sigmoid(u[i]);
          d[i] = sv * (1.0 - sv);
        }
      } else {
        for (int i = 0; i < u.size(); ++i) d[i] = u[i] > 0.0 ? 1.0 : 0.0;
      }
      grad_pre[static_cast<std::size_t>(f)] = grad_post[static_cast<std::size_t>(f)].cwiseProduct(d);
    }

    for (int f = 0; f < out; ++f)
      for (int g = 0; g < in; ++g)
        for (int k = 0; k < n_taps; ++k)
          grad.tap(l, f, g, k) =
              grad_pre[static_cast<std::size_t>(f)].dot(layer.shifted[static_cast<std::size_t>(g)][static_cast<std::size_t>(k)]);

    if (l > 0) {
      std::vector<NodeSignal> grad_in(static_cast<std::size_t>(in));
      for (int g = 0; g < in; ++g)
        grad_in[static_cast<std::size_t>(g)] = NodeSignal::Zero(cache.shift.size());
      for (int f = 0; f < out; ++f) {
        // S is symmetric, so the adjoint of x -> S^k x is the same map.
        NodeSignal w = grad_pre[static_cast<std::size_t>(f)];
        for (int k = 0; k < n_taps; ++k) {
          if (k > 0) w = cache.shift.s * w;
          for (int g = 0; g < in; ++g)
            grad_in[static_cast<std::size_t>(g)].noalias() += params.tap(l, f, g, k) * w;
        }
      }
      grad_post = std::move(grad_in);
    }
  }
  return grad;
}

PolicyParams split_heads(const Eigen::MatrixXd& outputs, int n_rrh, int n_an,
                         double p_peak, double power_std, bool allow_idle) {
  if (outputs.rows() != n_rrh + n_an)
    throw std::invalid_argument("split_heads: output rows do not match node count");
  if (outputs.cols() != n_an + 1)
    throw std::invalid_argument("split_heads: expected n_an + 1 output features");
  // The sigmoid is strictly inside (0,1) in exact arithmetic but saturates
  // to the closed interval in floating point.
  if ((outputs.array() < 0.0).any() || (outputs.array() > 1.0).any())
    throw std::invalid_argument("split_heads: outputs must lie in [0,1]");

  PolicyParams p;
  p.power_means = p_peak * outputs.col(0).head(n_rrh);
  p.power_std = power_std;
  p.p_peak = p_peak;
  p.allow_idle = allow_idle;

  Eigen::MatrixXd emb(n_rrh + n_an, n_an);
  for (int i = 0; i < outputs.rows(); ++i)
    for (int c = 0; c < n_an; ++c) emb(i, c) = logit(outputs(i, 1 + c));
  p.selection_logits.resize(n_rrh, n_an);
  for (int n = 0; n < n_rrh; ++n)
    for (int m = 0; m < n_an; ++m)
      p.selection_logits(n, m) = emb.row(n).dot(emb.row(n_rrh + m));
  return p;
}

Eigen::MatrixXd split_heads_backward(const Eigen::MatrixXd& outputs, int n_rrh,
                                     int n_an, double p_peak,
                                     const PolicyGrad& grad) {
  if (outputs.rows() != n_rrh + n_an || outputs.cols() != n_an + 1)
    throw std::invalid_argument("split_heads_backward: output shape mismatch");
  if (grad.d_power_means.size() != n_rrh ||
      grad.d_selection_logits.rows() != n_rrh ||
      grad.d_selection_logits.cols() != n_an)
    throw std::invalid_argument("split_heads_backward: gradient shape mismatch");

  Eigen::MatrixXd emb(n_rrh + n_an, n_an);
  for (int i = 0; i < outputs.rows(); ++i)
    for (int c = 0; c < n_an; ++c) emb(i, c) = logit(outputs(i, 1 + c));

  Eigen::MatrixXd out_grad = Eigen::MatrixXd::Zero(outputs.rows(), outputs.cols());
  out_grad.col(0).head(n_rrh) = p_peak * grad.d_power_means;

  // d logit(o) / d o = 1 / (o (1 - o)).
  auto dlogit = [](double o) {
    const double c = std::clamp(o, kLogitClamp, 1.0 - kLogitClamp);
    return 1.0 / (c * (1.0 - c));
  };
  // logits(n,m) = <e_n, e_{N+m}>.
  Eigen::MatrixXd d_emb = Eigen::MatrixXd::Zero(n_rrh + n_an, n_an);
  for (int n = 0; n < n_rrh; ++n)
    for (int m = 0; m < n_an; ++m) {
      const double gl = grad.d_selection_logits(n, m);
      if (gl == 0.0) continue;
      d_emb.row(n) += gl * emb.row(n_rrh + m);
      d_emb.row(n_rrh + m) += gl * emb.row(n);
    }
  for (int i = 0; i < outputs.rows(); ++i)
    for (int c = 0; c < n_an; ++c)
      out_grad(i, 1 + c) = d_emb(i, c) * dlogit(outputs(i, 1 + c));
  return out_grad;
}

}  // namespace fsoalloc
