#pragma once

#include <algorithm>
#include <numeric>

namespace snslab::stats {

template <class Cdf>
double weighted_ks_distance(std::span<const double> x, std::span<const double> w, Cdf&& cdf) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  double total = 0.0;
  for (double wi : w) total += wi;
  double cum = 0.0;
  double d = 0.0;
  for (std::size_t idx = 0; idx < order.size(); ++idx) {
    const std::size_t i = order[idx];
    const double f = cdf(x[i]);
    d = std::max(d, std::abs(f - cum / total));
    cum += w[i];
    d = std::max(d, std::abs(cum / total - f));
  }
  return d;
}

}  // namespace snslab::stats
