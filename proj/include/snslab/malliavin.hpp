#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "snslab/dynamics.hpp"

namespace snslab {

/// Differentiable map f : D(A) -> R^d given by its value and gradients.
class Functional {
 public:
  using ValueFn = std::function<std::vector<double>(const FourierState&)>;
  using GradientFn = std::function<std::vector<FourierState>(const FourierState&)>;

  Functional(std::size_t dim, ValueFn value, GradientFn gradient, std::string name);

  /// f(u) = (u_{n_1}, ..., u_{n_d}).
  static Functional coordinates(std::vector<std::size_t> F);
  /// f(u) = |u|_H^2, Df = 2 <u, .>.
  static Functional squared_norm();
  /// f(u) = c, Df = 0.
  static Functional constant(double c = 0.0);

  std::size_t dim() const { return dim_; }
  const std::string& name() const { return name_; }
  std::vector<double> value(const FourierState& u) const { return value_(u); }
  std::vector<FourierState> gradient(const FourierState& u) const { return gradient_(u); }

 private:
  std::size_t dim_;
  ValueFn value_;
  GradientFn gradient_;
  std::string name_;
};

/// Linearized dynamics along one frozen truncated path.
///
/// `base` must hold every grid state (record_every_step) of a trajectory of
/// `spec`. The derivative system is d eta + nu A eta + DB_R(u_R) eta = 0 with
/// eta(s, s) = q_k, discretized by the tangent map of the state step.
struct MalliavinSystem {
  DynamicsSpec spec;
  TrajectoryRecord base;
  Functional f;
  /// Noise directions q_k summed in the matrix; empty = whole basis.
  std::vector<std::size_t> directions;
  /// Stride of the start-time grid s_j = j * stride * dt.
  std::size_t stride = 1;

  MalliavinSystem(DynamicsSpec spec, TrajectoryRecord base, Functional f)
      : spec(std::move(spec)), base(std::move(base)), f(std::move(f)) {}

  std::size_t steps() const { return base.states.size() - 1; }
  double dt() const { return base.dt; }
  std::vector<std::size_t> direction_set() const;
};

/// Builds a system by integrating the base path with every step recorded.
MalliavinSystem make_malliavin_system(const FourierState& x, const DynamicsSpec& spec,
                                      double horizon, double dt, Functional f,
                                      std::uint64_t master_seed, std::uint64_t trajectory);

/// Tangent map of one step along base state u: decay * eta - gain * dt * DB_R(u) eta.
FourierState tangent_step(const MalliavinSystem& sys, const StepFactors& factors,
                          std::size_t step, const FourierState& eta);
/// Its transpose.
FourierState tangent_step_adjoint(const MalliavinSystem& sys, const StepFactors& factors,
                                  std::size_t step, const FourierState& a);

/// Path eta_k(t_m, s) for m = s_step .. t_step, starting from `initial`
/// (q_k by default).
std::vector<FourierState> evolve_eta(const MalliavinSystem& sys, std::size_t k,
                                     std::size_t s_step, std::size_t t_step);
std::vector<FourierState> evolve_eta_from(const MalliavinSystem& sys, const FourierState& initial,
                                          std::size_t s_step, std::size_t t_step);

class MalliavinMatrix {
 public:
  MalliavinMatrix() = default;
  explicit MalliavinMatrix(std::size_t d) : d_(d), entries_(d * d, 0.0) {}

  std::size_t dim() const { return d_; }
  double operator()(std::size_t i, std::size_t j) const { return entries_[i * d_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return entries_[i * d_ + j]; }
  std::span<const double> entries() const { return entries_; }

  double trace() const;
  double norm() const;  // Frobenius
  /// <M y, y>.
  double quadratic_form(std::span<const double> y) const;
  /// Ascending eigenvalues.
  std::vector<double> eigenvalues() const;
  bool symmetric(double tol = 0.0) const;
  bool positive_semidefinite(double rel_tol = 1e-10) const;

 private:
  std::size_t d_ = 0;
  std::vector<double> entries_;
};

/// Per start time s_j and direction k, the numbers Df_i(u(t)) eta_k(t, s_j),
/// computed by one adjoint sweep per component of f.
struct SensitivityTable {
  std::vector<std::size_t> s_steps;
  std::vector<double> s_weights;  // trapezoidal weights
  std::vector<std::size_t> directions;
  /// values[(j * |K| + kk) * d + i]
  std::vector<double> values;
  std::size_t d = 0;

  double at(std::size_t j, std::size_t kk, std::size_t i) const {
    return values[(j * directions.size() + kk) * d + i];
  }
};

SensitivityTable sensitivities(const MalliavinSystem& sys, std::size_t t_step);

/// M_ij(t) = sum_k sigma_k^2 int_0^t (Df_i eta_k(t,s)) (Df_j eta_k(t,s)) ds,
/// trapezoidal in s on the strided grid.
MalliavinMatrix assemble_matrix(const MalliavinSystem& sys, std::size_t t_step);
MalliavinMatrix assemble_matrix(const SensitivityTable& table, const CovarianceSpec& cov);

/// Same quadrature with every eta_k(t, s_j) integrated forward (reference path).
MalliavinMatrix assemble_matrix_forward(const MalliavinSystem& sys, std::size_t t_step);

/// sum_k sigma_k^2 int |sum_i y_i Df_i eta_k|^2 ds evaluated directly.
double malliavin_quadratic_form(const SensitivityTable& table, const CovarianceSpec& cov,
                                std::span<const double> y);

struct NondegeneracyReport {
  std::size_t count = 0;
  std::vector<double> min_eigenvalues;   // per matrix
  std::vector<double> relative_min;      // min eigenvalue / trace
  std::vector<double> thresholds;        // relative to trace
  std::vector<double> fraction_below;    // per threshold
  double min_quantiles[5] = {0, 0, 0, 0, 0};        // 0, 25, 50, 75, 100 %
  double condition_quantiles[5] = {0, 0, 0, 0, 0};
  std::size_t degenerate = 0;            // zero matrices or min eig <= first threshold

  std::string text() const;
};

NondegeneracyReport nondegeneracy_report(std::span<const MalliavinMatrix> matrices,
                                         std::vector<double> relative_thresholds = {1e-12, 1e-8,
                                                                                    1e-4});

}  // namespace snslab
