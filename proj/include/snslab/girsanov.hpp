#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "snslab/noise.hpp"
#include "snslab/spectral.hpp"

namespace snslab {

/// Log-weight components of the Girsanov density
/// G_t = exp(int <C^{-1/2} pi_F B(u), dW> - 1/2 int |C^{-1/2} pi_F B(u)|^2 ds).
/// The inverse density stores its stochastic integral with the sign flipped,
/// so weight() is the same expression for both.
struct GirsanovAccumulator {
  std::vector<std::size_t> F;
  double stoch_integral = 0.0;
  double quad_variation = 0.0;

  double log_weight() const { return stoch_integral - 0.5 * quad_variation; }
  double weight() const { return std::exp(log_weight()); }
};

/// Left-point Ito update with the white increment dW (variance dt per mode)
/// that also drives the state: theta = C^{-1/2} pi_F B(state),
/// stoch += <theta, dW>, quad += |theta|^2 dt.
GirsanovAccumulator accumulate(GirsanovAccumulator acc, const FourierState& state,
                               std::span<const double> white_increment, double dt,
                               const CovarianceSpec& cov);

/// Same update along the drift-removed dynamics v^N, with the integrand sign
/// flipped (inverse density).
GirsanovAccumulator inverse_weight_accumulate(GirsanovAccumulator acc, const FourierState& state,
                                              std::span<const double> white_increment, double dt,
                                              const CovarianceSpec& cov);

/// Update from an already evaluated B(state); used by the integrator.
void accumulate_from_bilinear(GirsanovAccumulator& acc, const FourierState& b,
                              std::span<const double> white_increment, double dt,
                              const CovarianceSpec& cov, double sign);

/// Ornstein-Uhlenbeck reference z^F on the span of the modes F:
/// Gaussian with mean e^{-nu A window} x_F and diagonal covariance
/// Q_kk = sigma_k^2 (1 - e^{-2 nu lambda_k window}) / (2 nu lambda_k).
struct OUReference {
  std::vector<std::size_t> F;
  double viscosity = 1.0;
  double window = 1.0;
  std::vector<double> lambda;    // lambda_k for k in F
  std::vector<double> variance;  // sigma_k^2 for k in F
  std::vector<double> mean;
  std::vector<double> Q;         // diagonal of the covariance

  std::size_t dim() const { return F.size(); }

  static OUReference build(const CovarianceSpec& cov, std::vector<std::size_t> F,
                           double viscosity, double window, const FourierState* initial = nullptr);
};

/// Exact draw mean + Q^{1/2} xi.
std::vector<double> ou_exact_sample(const OUReference& ref, RngStream& rng);

/// Gaussian density of the reference at `point`.
double ou_density(const OUReference& ref, std::span<const double> point);

struct StatisticRow {
  std::string statistic;
  double estimate = 0.0;
  double std_error = 0.0;
  double z_score = 0.0;
  bool pass = true;
};

struct EquivalenceReport {
  std::vector<StatisticRow> rows;
  double effective_sample_size = 0.0;
  bool reliable = true;
  bool pass = true;

  std::string csv() const;
  std::string summary_line() const;
};

struct EquivalenceOptions {
  double z_tolerance = 3.0;
  double ks_alpha = 0.01;
  double min_effective_sample_size = 100.0;
};

/// Compares weighted empirical moments (orders 1, 2) and weighted 1-d
/// marginal CDFs of samples (row-major, n x |F|) with the exact reference.
EquivalenceReport reweighted_equivalence_test(std::span<const double> samples,
                                              std::span<const double> weights,
                                              const OUReference& ref,
                                              const EquivalenceOptions& options = {});

}  // namespace snslab
