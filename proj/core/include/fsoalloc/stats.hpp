#pragma once

#include <cmath>
#include <random>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>

namespace fsoalloc {

inline double norm_pdf(double z) {
  return boost::math::pdf(boost::math::normal_distribution<double>(), z);
}

inline double norm_cdf(double z) {
  return boost::math::cdf(boost::math::normal_distribution<double>(), z);
}

inline double norm_quantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

/// Gaussian restricted to [lo, hi], renormalized. Sampling is by inverse CDF
/// on the truncated interval, so every draw lands in [lo, hi] by construction.
class TruncatedNormal {
 public:
  TruncatedNormal(double mean, double stddev, double lo, double hi)
      : mu_(mean), sigma_(stddev), lo_(lo), hi_(hi) {
    if (!(stddev > 0.0))
      throw std::invalid_argument("TruncatedNormal: stddev must be positive");
    if (!(lo < hi))
      throw std::invalid_argument("TruncatedNormal: empty support interval");
    alpha_ = (lo_ - mu_) / sigma_;
    beta_ = (hi_ - mu_) / sigma_;
    cdf_lo_ = norm_cdf(alpha_);
    cdf_hi_ = norm_cdf(beta_);
    mass_ = cdf_hi_ - cdf_lo_;
  }

  template <class Rng>
  double sample(Rng& rng) const {
    // Guard against a numerically empty interval far in a tail.
    if (mass_ <= 0.0) return std::clamp(mu_, lo_, hi_);
    std::uniform_real_distribution<double> unif(cdf_lo_, cdf_hi_);
    const double u = std::clamp(unif(rng), std::nextafter(0.0, 1.0),
                                std::nextafter(1.0, 0.0));
    return std::clamp(mu_ + sigma_ * norm_quantile(u), lo_, hi_);
  }

  bool in_support(double x) const { return x >= lo_ && x <= hi_; }

  double log_pdf(double x) const {
    if (!in_support(x))
      throw std::invalid_argument("TruncatedNormal: value outside support");
    const double z = (x - mu_) / sigma_;
    return -0.5 * z * z - 0.5 * std::log(2.0 * M_PI) - std::log(sigma_) -
           std::log(mass_);
  }

  /// d log_pdf / d mean: (x - mu)/sigma^2 minus the boundary-density
  /// correction (phi(alpha) - phi(beta)) / (sigma * mass).
  double log_pdf_grad_mean(double x) const {
    if (!in_support(x))
      throw std::invalid_argument("TruncatedNormal: value outside support");
    return (x - mu_) / (sigma_ * sigma_) -
           (norm_pdf(alpha_) - norm_pdf(beta_)) / (sigma_ * mass_);
  }

  double mass() const { return mass_; }

 private:
  double mu_, sigma_, lo_, hi_;
  double alpha_, beta_, cdf_lo_, cdf_hi_, mass_;
};

}  // namespace fsoalloc
