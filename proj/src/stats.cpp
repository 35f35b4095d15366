#include "snslab/stats.hpp"

#include <algorithm>
#include <stdexcept>

namespace snslab::stats {

MeanEstimate mean_estimate(std::span<const double> x) {
  MeanEstimate e;
  e.n = x.size();
  if (x.empty()) return e;
  double s = 0.0;
  for (double v : x) s += v;
  e.mean = s / double(x.size());
  if (x.size() > 1) {
    double q = 0.0;
    for (double v : x) q += (v - e.mean) * (v - e.mean);
    e.variance = q / double(x.size() - 1);
    e.std_error = std::sqrt(e.variance / double(x.size()));
  }
  return e;
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y,
                     std::span<const double> weights) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("linear_fit needs at least two (x, y) pairs");
  }
  const std::size_t n = x.size();
  auto w = [&](std::size_t i) { return weights.empty() ? 1.0 : weights[i]; };
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sw += w(i);
    sx += w(i) * x[i];
    sy += w(i) * y[i];
  }
  const double mx = sx / sw;
  const double my = sy / sw;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += w(i) * (x[i] - mx) * (x[i] - mx);
    sxy += w(i) * (x[i] - mx) * (y[i] - my);
  }
  LinearFit fit;
  fit.points = n;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    rss += r * r;
  }
  fit.residual = std::sqrt(rss / double(n));
  if (n > 2) {
    if (weights.empty()) {
      fit.slope_error = std::sqrt(rss / double(n - 2) / sxx);
    } else {
      fit.slope_error = std::sqrt(1.0 / sxx);
    }
  }
  return fit;
}

double ks_critical_coefficient(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  return std::sqrt(-0.5 * std::log(alpha / 2.0));
}

double effective_sample_size(std::span<const double> w) {
  double s = 0.0, q = 0.0;
  for (double v : w) {
    s += v;
    q += v * v;
  }
  return q > 0.0 ? s * s / q : 0.0;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::abs(double(i) / a.size() - double(j) / b.size()));
  }
  return d;
}

}  // namespace snslab::stats
