#pragma once

#include <optional>
#include <string>
#include <vector>

#include "snslab/rng.hpp"
#include "snslab/spectral.hpp"

namespace snslab {

enum class CovarianceFamily { PowerLaw, ExplicitList };

/// Diagonal covariance C q_k = sigma_k^2 q_k with q_k the Stokes eigenbasis.
class CovarianceSpec {
 public:
  /// sigma_k^2 = lambda_k^(-alpha).
  static CovarianceSpec power_law(BasisPtr basis, double alpha);
  static CovarianceSpec explicit_list(BasisPtr basis, std::vector<double> variances);

  const BasisPtr& basis() const { return basis_; }
  CovarianceFamily family() const { return family_; }
  /// Power-law exponent; only meaningful for the PowerLaw family.
  double alpha() const { return alpha_; }
  const std::vector<double>& variances() const { return variances_; }
  double variance(std::size_t k) const { return variances_.at(k); }
  double stddev(std::size_t k) const { return stddevs_.at(k); }
  double trace() const { return trace_; }
  bool injective() const;

  /// Same family restricted to a prefix basis.
  CovarianceSpec restricted(BasisPtr prefix_basis) const;

 private:
  CovarianceSpec(BasisPtr basis, CovarianceFamily family, double alpha,
                 std::vector<double> variances);

  BasisPtr basis_;
  CovarianceFamily family_;
  double alpha_;
  std::vector<double> variances_;
  std::vector<double> stddevs_;
  double trace_;
};

struct MarkovAssumptionReport {
  double eps = 0.0;
  double delta = 0.0;
  /// sum_k lambda_k^(1+eps) sigma_k^2 over the finite basis.
  double partial_trace = 0.0;
  /// max_k sigma_k^-1 lambda_k^-delta (infinite if some sigma_k = 0).
  double inverse_bound = 0.0;
  bool inverse_bounded = false;
  /// Infinite-dimensional verdicts, known only for the power-law family.
  std::optional<bool> trace_condition;
  std::optional<bool> inverse_condition;

  bool satisfied() const {
    return trace_condition.value_or(false) && inverse_condition.value_or(false);
  }
  std::string text() const;
};

/// Finite-basis diagnostics for Tr(A^(1+eps) C) < inf and
/// C^(-1/2) A^(-delta) bounded, delta in (1, 3/2].
MarkovAssumptionReport check_markov_assumption(const CovarianceSpec& spec, double eps,
                                               double delta);

/// C^(1/2) Delta W with Delta W ~ N(0, dt I): mode k has variance sigma_k^2 dt.
FourierState sample_increment(const CovarianceSpec& spec, double dt, RngStream& rng);

/// Coefficient-wise division by sigma_k on `support`, zero elsewhere.
FourierState apply_sqrt_inverse(const CovarianceSpec& spec, const FourierState& u,
                                const std::vector<std::size_t>& support);

}  // namespace snslab
