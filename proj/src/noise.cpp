#include "snslab/noise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace snslab {

CovarianceSpec::CovarianceSpec(BasisPtr basis, CovarianceFamily family, double alpha,
                               std::vector<double> variances)
    : basis_(std::move(basis)), family_(family), alpha_(alpha), variances_(std::move(variances)) {
  if (variances_.size() != basis_->size()) {
    throw InvalidArgument("variance list has " + std::to_string(variances_.size()) +
                          " entries, basis has " + std::to_string(basis_->size()) + " modes");
  }
  for (double v : variances_) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw InvalidArgument("variances must be finite and nonnegative");
    }
    stddevs_.push_back(std::sqrt(v));
  }
  trace_ = std::accumulate(variances_.begin(), variances_.end(), 0.0);
}

CovarianceSpec CovarianceSpec::power_law(BasisPtr basis, double alpha) {
  if (!std::isfinite(alpha)) throw InvalidArgument("power-law exponent must be finite");
  std::vector<double> v;
  v.reserve(basis->size());
  for (double lambda : basis->eigenvalues()) v.push_back(std::pow(lambda, -alpha));
  return CovarianceSpec(std::move(basis), CovarianceFamily::PowerLaw, alpha, std::move(v));
}

CovarianceSpec CovarianceSpec::explicit_list(BasisPtr basis, std::vector<double> variances) {
  return CovarianceSpec(std::move(basis), CovarianceFamily::ExplicitList, 0.0,
                        std::move(variances));
}

bool CovarianceSpec::injective() const {
  return std::all_of(variances_.begin(), variances_.end(), [](double v) { return v > 0.0; });
}

CovarianceSpec CovarianceSpec::restricted(BasisPtr prefix_basis) const {
  if (prefix_basis->size() > variances_.size()) {
    throw InvalidArgument("restriction basis is larger than the covariance basis");
  }
  if (family_ == CovarianceFamily::PowerLaw) return power_law(std::move(prefix_basis), alpha_);
  std::vector<double> v(variances_.begin(), variances_.begin() + prefix_basis->size());
  return explicit_list(std::move(prefix_basis), std::move(v));
}

std::string MarkovAssumptionReport::text() const {
  std::ostringstream os;
  os.precision(10);
  os << "eps = " << eps << "\n"
     << "delta = " << delta << "\n"
     << "partial_trace_A^(1+eps)C = " << partial_trace << "\n"
     << "sup_sigma^-1_lambda^-delta = " << inverse_bound << "\n"
     << "inverse_bounded_on_basis = " << (inverse_bounded ? "yes" : "no") << "\n";
  auto verdict = [](const std::optional<bool>& v) -> const char* {
    if (!v) return "unknown (explicit list)";
    return *v ? "holds" : "fails";
  };
  os << "trace_condition = " << verdict(trace_condition) << "\n"
     << "inverse_condition = " << verdict(inverse_condition) << "\n"
     << "verdict = " << (satisfied() ? "satisfied" : "not satisfied") << "\n";
  return os.str();
}

MarkovAssumptionReport check_markov_assumption(const CovarianceSpec& spec, double eps,
                                               double delta) {
  if (!(delta > 1.0 && delta <= 1.5)) {
    throw InvalidArgument("delta must lie in (1, 3/2], got " + std::to_string(delta));
  }
  if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
  MarkovAssumptionReport r;
  r.eps = eps;
  r.delta = delta;
  const auto lambda = spec.basis()->eigenvalues();
  r.inverse_bounded = true;
  for (std::size_t k = 0; k < lambda.size(); ++k) {
    r.partial_trace += std::pow(lambda[k], 1.0 + eps) * spec.variance(k);
    if (spec.variance(k) == 0.0) {
      r.inverse_bounded = false;
      r.inverse_bound = std::numeric_limits<double>::infinity();
    } else if (r.inverse_bounded) {
      r.inverse_bound =
          std::max(r.inverse_bound, std::pow(lambda[k], -delta) / spec.stddev(k));
    }
  }
  if (spec.family() == CovarianceFamily::PowerLaw) {
    // On the 3-torus #{k : lambda_k <= L} ~ L^(3/2), so
    // sum lambda^(1+eps-alpha) < inf iff alpha > 5/2 + eps, and
    // sigma_k^-1 lambda_k^-delta = lambda^(alpha/2 - delta) is bounded iff alpha <= 2 delta.
    r.trace_condition = spec.alpha() > 2.5 + eps;
    r.inverse_condition = spec.alpha() <= 2.0 * delta;
  }
  return r;
}

FourierState sample_increment(const CovarianceSpec& spec, double dt, RngStream& rng) {
  if (!(dt > 0.0)) throw InvalidArgument("increment time step must be positive");
  FourierState out(spec.basis());
  const double sq = std::sqrt(dt);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = spec.stddev(k) * sq * rng.normal();
  return out;
}

FourierState apply_sqrt_inverse(const CovarianceSpec& spec, const FourierState& u,
                                const std::vector<std::size_t>& support) {
  FourierState out(u.basis());
  for (std::size_t k : support) {
    if (k >= u.size()) throw InvalidArgument("support mode " + std::to_string(k) + " out of range");
    if (spec.variance(k) == 0.0) {
      throw InvalidArgument("covariance has zero variance on support mode " + std::to_string(k));
    }
    out[k] = u[k] / spec.stddev(k);
  }
  return out;
}

}  // namespace snslab
