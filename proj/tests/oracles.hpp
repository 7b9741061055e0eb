#pragma once

// Independent oracles for the test suites: finite differences and
// quadrature/enumeration expectations. Deliberately reimplemented from
// scratch (std::erfc, Gauss-Kronrod) so they share no code with the library
// paths they check.

#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Core>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace oracle {

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

inline double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
}

/// Density of a Gaussian(mu, sigma) truncated to [lo, hi].
inline double truncnorm_pdf(double p, double mu, double sigma, double lo, double hi) {
  if (p < lo || p > hi) return 0.0;
  const double mass = normal_cdf((hi - mu) / sigma) - normal_cdf((lo - mu) / sigma);
  return normal_pdf((p - mu) / sigma) / (sigma * mass);
}

inline std::vector<double> softmax(const std::vector<double>& z) {
  double m = z[0];
  for (double v : z) m = std::max(m, v);
  double sum = 0.0;
  std::vector<double> e(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    e[i] = std::exp(z[i] - m);
    sum += e[i];
  }
  for (double& v : e) v /= sum;
  return e;
}

/// E[f(p, sel)] for one RRH under the truncated-Gaussian x categorical
/// policy, by Gauss-Kronrod quadrature and category enumeration.
inline double expect_single_rrh(const std::function<double(double, int)>& f,
                                double mu, double sigma, double p_peak,
                                const std::vector<double>& logits) {
  const std::vector<double> probs = softmax(logits);
  double total = 0.0;
  for (std::size_t sel = 0; sel < probs.size(); ++sel) {
    auto integrand = [&](double p) {
      return truncnorm_pdf(p, mu, sigma, 0.0, p_peak) * f(p, static_cast<int>(sel));
    };
    const double integral =
        boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
            integrand, 0.0, p_peak, 12, 1e-12);
    total += probs[sel] * integral;
  }
  return total;
}

/// Central finite difference of a scalar function of one perturbed value.
inline double central_diff(const std::function<double(double)>& f_of_delta,
                           double step) {
  return (f_of_delta(step) - f_of_delta(-step)) / (2.0 * step);
}

struct RelErr {
  double max_rel = 0.0;
  double worst_a = 0.0, worst_b = 0.0;

  void add(double got, double want, double floor = 1e-8) {
    const double rel = std::abs(got - want) / std::max(std::abs(want), floor);
    if (rel > max_rel) {
      max_rel = rel;
      worst_a = got;
      worst_b = want;
    }
  }
};

}  // namespace oracle
