#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace snslab::stats {

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  double variance = 0.0;
  std::size_t n = 0;
};

/// Sample mean with the standard error of the mean (unbiased variance).
MeanEstimate mean_estimate(std::span<const double> x);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;   // root-mean-square residual
  double slope_error = 0.0;
  std::size_t points = 0;
};

/// Least-squares line through (x, y); weights optional (1 / sigma^2).
LinearFit linear_fit(std::span<const double> x, std::span<const double> y,
                     std::span<const double> weights = {});

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

/// Asymptotic Kolmogorov-Smirnov critical coefficient c(alpha) with
/// P(sqrt(n) D > c) = alpha.
double ks_critical_coefficient(double alpha);

/// Effective sample size (sum w)^2 / sum w^2.
double effective_sample_size(std::span<const double> w);

/// Weighted sup distance between the empirical CDF of x (weights w,
/// self-normalized) and a reference CDF.
template <class Cdf>
double weighted_ks_distance(std::span<const double> x, std::span<const double> w, Cdf&& cdf);

/// Two-sample ordinary KS distance.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

}  // namespace snslab::stats

#include "snslab/detail/stats_impl.hpp"
