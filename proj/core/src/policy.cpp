#include "fsoalloc/policy.hpp"

#include <cmath>
#include <stdexcept>

#include "fsoalloc/stats.hpp"

namespace fsoalloc {

namespace {

void check_params(const PolicyParams& p) {
  if (p.power_means.size() != p.selection_logits.rows())
    throw std::invalid_argument("policy: power_means/selection_logits row mismatch");
  if (!(p.power_std > 0.0))
    throw std::invalid_argument("policy: power_std must be positive");
  if (!(p.p_peak > 0.0))
    throw std::invalid_argument("policy: p_peak must be positive");
  if ((p.power_means.array() < 0.0).any() ||
      (p.power_means.array() > p.p_peak).any())
    throw std::invalid_argument("policy: power mean outside [0, p_peak]");
}

void check_support(const PolicyParams& p, const Allocation& a) {
  if (a.n_rrh() != p.n_rrh() ||
      static_cast<int>(a.selections.size()) != p.n_rrh())
    throw std::invalid_argument("policy: allocation shape mismatch");
  for (int n = 0; n < a.n_rrh(); ++n) {
    if (!(a.powers[n] >= 0.0 && a.powers[n] <= p.p_peak))
      throw std::invalid_argument("policy: power outside [0, p_peak]");
    if (a.selections[static_cast<std::size_t>(n)] < 0 ||
        a.selections[static_cast<std::size_t>(n)] >= p.n_choices())
      throw std::invalid_argument("policy: selection index outside support");
  }
}

// softmax over the logits row plus, when idling is allowed, a fixed 0 logit.
Eigen::VectorXd softmax_row(const PolicyParams& p, int n) {
  const int c = p.n_choices();
  Eigen::VectorXd z = Eigen::VectorXd::Zero(c);
  z.head(p.n_an()) = p.selection_logits.row(n).transpose();
  const double m = z.maxCoeff();
  Eigen::VectorXd e = (z.array() - m).exp();
  return e / e.sum();
}

}  // namespace

Eigen::VectorXd selection_probs(const PolicyParams& params, int n) {
  return softmax_row(params, n);
}

Allocation sample(const PolicyParams& params, std::mt19937_64& rng) {
  check_params(params);
  const int n_rrh = params.n_rrh();
  Allocation a;
  a.powers.resize(n_rrh);
  a.selections.resize(static_cast<std::size_t>(n_rrh));
  for (int n = 0; n < n_rrh; ++n) {
    TruncatedNormal tn(params.power_means[n], params.power_std, 0.0, params.p_peak);
    a.powers[n] = tn.sample(rng);
    const Eigen::VectorXd probs = softmax_row(params, n);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double u = unif(rng);
    double acc = 0.0;
    int sel = params.n_choices() - 1;
    for (int m = 0; m < params.n_choices(); ++m) {
      acc += probs[m];
      if (u < acc) {
        sel = m;
        break;
      }
    }
    a.selections[static_cast<std::size_t>(n)] = sel;
  }
  return a;
}

double log_prob(const PolicyParams& params, const Allocation& a) {
  check_params(params);
  check_support(params, a);
  double lp = 0.0;
  for (int n = 0; n < a.n_rrh(); ++n) {
    TruncatedNormal tn(params.power_means[n], params.power_std, 0.0, params.p_peak);
    lp += tn.log_pdf(a.powers[n]);
    const Eigen::VectorXd probs = softmax_row(params, n);
    lp += std::log(probs[a.selections[static_cast<std::size_t>(n)]]);
  }
  return lp;
}

PolicyGrad log_prob_grad(const PolicyParams& params, const Allocation& a) {
  check_params(params);
  check_support(params, a);
  PolicyGrad g;
  g.d_power_means.resize(params.n_rrh());
  g.d_selection_logits.resize(params.n_rrh(), params.n_an());
  for (int n = 0; n < params.n_rrh(); ++n) {
    TruncatedNormal tn(params.power_means[n], params.power_std, 0.0, params.p_peak);
    g.d_power_means[n] = tn.log_pdf_grad_mean(a.powers[n]);
    const Eigen::VectorXd probs = softmax_row(params, n);
    const int sel = a.selections[static_cast<std::size_t>(n)];
    for (int m = 0; m < params.n_an(); ++m)
      g.d_selection_logits(n, m) = (m == sel ? 1.0 : 0.0) - probs[m];
  }
  return g;
}

}  // namespace fsoalloc
