#pragma once

// Goodness-of-fit helpers for the Monte Carlo tests.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace bayestomo::testing {

/// One-sample Kolmogorov-Smirnov statistic sup |F_n - F|.
inline double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

/// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

/// Asymptotic Kolmogorov survival function Q(lambda) = P(sqrt(n_eff) D > lambda).
inline double kolmogorov_survival(double lambda) {
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

inline double ks_pvalue(double d, double n) { return kolmogorov_survival(std::sqrt(n) * d); }

inline double ks_pvalue(double d, double na, double nb) {
  return kolmogorov_survival(std::sqrt(na * nb / (na + nb)) * d);
}

/// 95 % points of the chi-square distribution.
inline constexpr double kChiSquare95Df19 = 30.1435;
inline constexpr double kChiSquare95Df20 = 31.4104;

/// Chi-square statistic for weighted counts. Samples are drawn from some
/// measure q and carry weights w = dp/dq, so the bin totals W_k have mean
/// N p_k and covariance N (M_k delta_jk - p_j p_k) with M_k = E[w^2 1_k].
/// The quadratic form over all bins is asymptotically chi-square with
/// bins degrees of freedom (the total weight is not fixed).
inline double weighted_chi_square(const Eigen::VectorXd& bin_weight,
                                  const Eigen::VectorXd& bin_weight_sq,
                                  const Eigen::VectorXd& expected_prob, double n) {
  const Eigen::VectorXd d = bin_weight - n * expected_prob;
  Eigen::MatrixXd cov = -n * expected_prob * expected_prob.transpose();
  cov.diagonal() += bin_weight_sq;  // n * M_k, estimated by the sum of w^2
  return d.dot(cov.ldlt().solve(d));
}

/// Plain Pearson statistic for unweighted multinomial counts.
inline double pearson_chi_square(const Eigen::VectorXd& counts, const Eigen::VectorXd& expected_prob) {
  const double n = counts.sum();
  const Eigen::VectorXd e = n * expected_prob;
  return ((counts - e).array().square() / e.array()).sum();
}

}  // namespace bayestomo::testing
