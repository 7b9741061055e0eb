#include "fsoalloc/channel.hpp"

#include <cmath>
#include <stdexcept>

#include "fsoalloc/rng.hpp"

namespace fsoalloc {

void FadingConfig::validate() const {
  if (!(attenuation_rate > 0.0))
    throw std::invalid_argument("FadingConfig: attenuation_rate must be > 0");
  if (!(lognormal_sigma >= 0.0))
    throw std::invalid_argument("FadingConfig: lognormal_sigma must be >= 0");
  if (!(snr_gain > 0.0))
    throw std::invalid_argument("FadingConfig: snr_gain must be > 0");
  if (!(bandwidth_scale > 0.0))
    throw std::invalid_argument("FadingConfig: bandwidth_scale must be > 0");
}

NodeSignal default_node_state(int n_rrh, int n_an) {
  return NodeSignal::Ones(n_rrh + n_an);
}

Topology sample_topology(int n_rrh, int n_an, std::uint64_t seed) {
  if (n_rrh < 1 || n_an < 1)
    throw std::invalid_argument("sample_topology: need at least one RRH and one AN");
  auto rng = seeded_rng(seed);
  std::uniform_real_distribution<double> rrh_box(-5.0, 5.0);
  std::uniform_real_distribution<double> an_box(-1.0, 1.0);
  std::uniform_real_distribution<double> weight(0.0, 1.0);

  Topology t;
  t.rrh_positions.resize(n_rrh, 2);
  t.an_positions.resize(n_an, 2);
  t.weights.resize(n_rrh);
  for (int n = 0; n < n_rrh; ++n) {
    t.rrh_positions(n, 0) = rrh_box(rng);
    t.rrh_positions(n, 1) = rrh_box(rng);
  }
  for (int m = 0; m < n_an; ++m) {
    t.an_positions(m, 0) = an_box(rng);
    t.an_positions(m, 1) = an_box(rng);
  }
  // Weights in (0, 1]: map a [0,1) draw to avoid a zero-priority RRH.
  for (int n = 0; n < n_rrh; ++n) t.weights[n] = 1.0 - weight(rng);
  return t;
}

ChannelMatrix sample_csi(const Topology& t, const FadingConfig& f,
                         std::mt19937_64& rng) {
  f.validate();
  const double sigma = f.lognormal_sigma;
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd g(t.n_rrh(), t.n_an());
  for (int n = 0; n < t.n_rrh(); ++n) {
    for (int m = 0; m < t.n_an(); ++m) {
      const double d = (t.rrh_positions.row(n) - t.an_positions.row(m)).norm();
      const double path = std::exp(-f.attenuation_rate * d);
      // Unit-mean log-normal: log-scale mean -sigma^2/2.
      const double fade =
          sigma > 0.0 ? std::exp(-0.5 * sigma * sigma + sigma * gauss(rng)) : 1.0;
      g(n, m) = path * fade;
    }
  }
  return ChannelMatrix::make(std::move(g));
}

double capacity(double h, double power, bool selected, const FadingConfig& f) {
  if (h < 0.0) throw std::invalid_argument("capacity: negative channel gain");
  if (power < 0.0) throw std::invalid_argument("capacity: negative power");
  if (!selected) return 0.0;
  return f.bandwidth_scale * std::log2(1.0 + f.snr_gain * h * power);
}

double weighted_objective(const Topology& t, const ChannelMatrix& h,
                          const Allocation& a, const FadingConfig& f) {
  if (h.n_rrh() != t.n_rrh() || h.n_an() != t.n_an())
    throw std::invalid_argument("weighted_objective: channel/topology size mismatch");
  if (a.n_rrh() != t.n_rrh())
    throw std::invalid_argument("weighted_objective: allocation size mismatch");
  double obj = 0.0;
  for (int n = 0; n < t.n_rrh(); ++n) {
    const int sel = a.selections[static_cast<std::size_t>(n)];
    if (sel >= h.n_an()) continue;  // idle
    obj += t.weights[n] * capacity(h.gains(n, sel), a.powers[n], true, f);
  }
  return obj;
}

Eigen::VectorXd per_an_load(const ChannelMatrix& h, const Allocation& a,
                            const FadingConfig& f) {
  if (a.n_rrh() != h.n_rrh())
    throw std::invalid_argument("per_an_load: allocation size mismatch");
  Eigen::VectorXd load = Eigen::VectorXd::Zero(h.n_an());
  for (int n = 0; n < h.n_rrh(); ++n) {
    const int sel = a.selections[static_cast<std::size_t>(n)];
    if (sel >= h.n_an()) continue;  // idle
    load[sel] += capacity(h.gains(n, sel), a.powers[n], true, f);
  }
  return load;
}

}  // namespace fsoalloc
