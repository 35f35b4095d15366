#include "snslab/girsanov.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "snslab/stats.hpp"

namespace snslab {

void accumulate_from_bilinear(GirsanovAccumulator& acc, const FourierState& b,
                              std::span<const double> dW, double dt, const CovarianceSpec& cov,
                              double sign) {
  double stoch = 0.0;
  double quad = 0.0;
  for (std::size_t k : acc.F) {
    if (cov.variance(k) == 0.0) {
      throw InvalidArgument("Girsanov integrand needs sigma_k > 0 on F; mode " +
                            std::to_string(k) + " has zero variance");
    }
    const double theta = b[k] / cov.stddev(k);
    stoch += theta * dW[k];
    quad += theta * theta;
  }
  acc.stoch_integral += sign * stoch;
  acc.quad_variation += quad * dt;
}

GirsanovAccumulator accumulate(GirsanovAccumulator acc, const FourierState& state,
                               std::span<const double> dW, double dt, const CovarianceSpec& cov) {
  if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
  accumulate_from_bilinear(acc, bilinear(state, state), dW, dt, cov, 1.0);
  return acc;
}

GirsanovAccumulator inverse_weight_accumulate(GirsanovAccumulator acc, const FourierState& state,
                                              std::span<const double> dW, double dt,
                                              const CovarianceSpec& cov) {
  if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
  accumulate_from_bilinear(acc, bilinear(state, state), dW, dt, cov, -1.0);
  return acc;
}

OUReference OUReference::build(const CovarianceSpec& cov, std::vector<std::size_t> F,
                               double viscosity, double window, const FourierState* initial) {
  if (!(window > 0.0)) throw InvalidArgument("OU reference window must be positive");
  if (!(viscosity > 0.0)) throw InvalidArgument("viscosity must be positive");
  if (F.empty()) throw InvalidArgument("OU reference needs a nonempty projection F");
  OUReference ref;
  ref.viscosity = viscosity;
  ref.window = window;
  for (std::size_t k : F) {
    if (k >= cov.basis()->size()) throw InvalidArgument("projection mode outside basis");
    const double lambda = cov.basis()->eigenvalues()[k];
    const double rate = 2.0 * viscosity * lambda;
    ref.lambda.push_back(lambda);
    ref.variance.push_back(cov.variance(k));
    ref.Q.push_back(cov.variance(k) * -std::expm1(-rate * window) / rate);
    ref.mean.push_back(initial ? std::exp(-viscosity * lambda * window) * (*initial)[k] : 0.0);
  }
  ref.F = std::move(F);
  return ref;
}

std::vector<double> ou_exact_sample(const OUReference& ref, RngStream& rng) {
  std::vector<double> x(ref.dim());
  for (std::size_t i = 0; i < ref.dim(); ++i) x[i] = ref.mean[i] + std::sqrt(ref.Q[i]) * rng.normal();
  return x;
}

double ou_density(const OUReference& ref, std::span<const double> point) {
  if (point.size() != ref.dim()) throw InvalidArgument("point dimension does not match |F|");
  double log_det = 0.0;
  double quad = 0.0;
  for (std::size_t i = 0; i < ref.dim(); ++i) {
    if (!(ref.Q[i] > 0.0)) throw InvalidArgument("OU covariance is degenerate");
    log_det += std::log(ref.Q[i]);
    const double z = point[i] - ref.mean[i];
    quad += z * z / ref.Q[i];
  }
  return std::exp(-0.5 * quad - 0.5 * log_det -
                  0.5 * double(ref.dim()) * std::log(2.0 * std::numbers::pi));
}

std::string EquivalenceReport::csv() const {
  std::ostringstream os;
  os << "statistic,estimate,std_error,z_score,pass\n";
  char line[256];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%s,%.10g,%.10g,%.6f,%d\n", r.statistic.c_str(), r.estimate,
                  r.std_error, r.z_score, r.pass ? 1 : 0);
    os << line;
  }
  return os.str();
}

std::string EquivalenceReport::summary_line() const {
  char line[160];
  std::snprintf(line, sizeof line, "RESULT %s ess=%.1f reliable=%s",
                pass ? "PASS" : "FAIL", effective_sample_size, reliable ? "yes" : "no");
  return line;
}

EquivalenceReport reweighted_equivalence_test(std::span<const double> samples,
                                              std::span<const double> weights,
                                              const OUReference& ref,
                                              const EquivalenceOptions& options) {
  const std::size_t d = ref.dim();
  if (d == 0 || samples.size() % d != 0) throw InvalidArgument("sample array is not n x |F|");
  const std::size_t n = samples.size() / d;
  if (weights.size() != n) throw InvalidArgument("one weight per sample is required");
  if (n < 2) throw InvalidArgument("need at least two samples");
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) throw InvalidArgument("weights must be positive and finite");
  }

  EquivalenceReport rep;
  rep.effective_sample_size = stats::effective_sample_size(weights);
  rep.reliable = rep.effective_sample_size >= options.min_effective_sample_size;

  auto add_mean_row = [&](std::string name, const std::vector<double>& values, double target) {
    const auto e = stats::mean_estimate(values);
    StatisticRow r;
    r.statistic = std::move(name);
    r.estimate = e.mean;
    r.std_error = e.std_error;
    r.z_score = e.std_error > 0.0 ? (e.mean - target) / e.std_error
                                  : (e.mean == target ? 0.0 : INFINITY);
    r.pass = std::abs(r.z_score) <= options.z_tolerance;
    rep.rows.push_back(r);
  };

  add_mean_row("weight_mean", std::vector<double>(weights.begin(), weights.end()), 1.0);
  std::vector<double> values(n);
  for (std::size_t i = 0; i < d; ++i) {
    const std::string tag = "mode" + std::to_string(ref.F[i]);
    for (std::size_t s = 0; s < n; ++s) values[s] = weights[s] * (samples[s * d + i] - ref.mean[i]);
    add_mean_row("first_moment_" + tag, values, 0.0);
    for (std::size_t s = 0; s < n; ++s) {
      const double z = samples[s * d + i] - ref.mean[i];
      values[s] = weights[s] * z * z;
    }
    add_mean_row("second_moment_" + tag, values, ref.Q[i]);
  }
  const double c_alpha = stats::ks_critical_coefficient(options.ks_alpha);
  std::vector<double> marginal(n);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t s = 0; s < n; ++s) marginal[s] = samples[s * d + i];
    const double m = ref.mean[i];
    const double sd = std::sqrt(ref.Q[i]);
    const double dist = stats::weighted_ks_distance(
        marginal, weights, [&](double x) { return stats::normal_cdf((x - m) / sd); });
    StatisticRow r;
    r.statistic = "ks_sup_mode" + std::to_string(ref.F[i]);
    r.estimate = dist;
    r.std_error = 1.0 / std::sqrt(rep.effective_sample_size);
    r.z_score = dist * std::sqrt(rep.effective_sample_size);
    r.pass = r.z_score < c_alpha;
    rep.rows.push_back(r);
  }
  rep.pass = rep.reliable &&
             std::all_of(rep.rows.begin(), rep.rows.end(), [](const auto& r) { return r.pass; });
  return rep;
}

}  // namespace snslab
