#include "snslab/malliavin.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

namespace snslab {

Functional::Functional(std::size_t dim, ValueFn value, GradientFn gradient, std::string name)
    : dim_(dim), value_(std::move(value)), gradient_(std::move(gradient)), name_(std::move(name)) {}

Functional Functional::coordinates(std::vector<std::size_t> F) {
  if (F.empty()) throw InvalidArgument("coordinate functional needs a nonempty F");
  const std::size_t d = F.size();
  return Functional(
      d,
      [F](const FourierState& u) {
        std::vector<double> v;
        for (std::size_t k : F) v.push_back(u[k]);
        return v;
      },
      [F](const FourierState& u) {
        std::vector<FourierState> g;
        for (std::size_t k : F) g.push_back(FourierState::unit(u.basis(), k));
        return g;
      },
      "coordinates");
}

Functional Functional::squared_norm() {
  return Functional(
      1, [](const FourierState& u) { return std::vector<double>{inner_product(u, u)}; },
      [](const FourierState& u) { return std::vector<FourierState>{2.0 * u}; }, "squared_norm");
}

Functional Functional::constant(double c) {
  return Functional(
      1, [c](const FourierState&) { return std::vector<double>{c}; },
      [](const FourierState& u) { return std::vector<FourierState>{FourierState(u.basis())}; },
      "constant");
}

std::vector<std::size_t> MalliavinSystem::direction_set() const {
  if (!directions.empty()) return directions;
  std::vector<std::size_t> all(spec.basis()->size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return all;
}

MalliavinSystem make_malliavin_system(const FourierState& x, const DynamicsSpec& spec,
                                      double horizon, double dt, Functional f,
                                      std::uint64_t master_seed, std::uint64_t trajectory) {
  TrajectoryOptions opts;
  opts.record_every_step = true;
  TrajectoryRecord base = run_trajectory(x, spec, horizon, dt, opts, master_seed, trajectory);
  return MalliavinSystem(spec, std::move(base), std::move(f));
}

namespace {

void require_supported(const DynamicsSpec& spec) {
  if (spec.variant != Variant::Truncated && spec.variant != Variant::Galerkin) {
    throw InvalidArgument("Malliavin derivative is implemented for the truncated and Galerkin "
                          "variants only");
  }
}

FourierState linearized_drift(const DynamicsSpec& spec, const FourierState& u,
                              const FourierState& theta) {
  if (!spec.nonlinear) return FourierState(u.basis());
  if (spec.variant == Variant::Truncated) {
    return truncated_bilinear_derivative(u, theta, spec.R, spec.chi);
  }
  FourierState out = bilinear(theta, u);
  out += bilinear(u, theta);
  return out;
}

FourierState linearized_drift_adjoint(const DynamicsSpec& spec, const FourierState& u,
                                      const FourierState& w) {
  if (!spec.nonlinear) return FourierState(u.basis());
  if (spec.variant == Variant::Truncated) {
    return truncated_bilinear_derivative_adjoint(u, w, spec.R, spec.chi);
  }
  FourierState out = bilinear_adjoint_left(w, u);
  out += bilinear_adjoint_right(w, u);
  return out;
}

void check_range(const MalliavinSystem& sys, std::size_t s_step, std::size_t t_step) {
  if (sys.base.states.size() < 2 || sys.base.steps.size() != sys.base.states.size() ||
      sys.base.steps.back() + 1 != sys.base.states.size()) {
    throw InvalidArgument("Malliavin base trajectory must record every grid step");
  }
  if (s_step > t_step || t_step > sys.steps()) {
    throw InvalidArgument("base trajectory gap: requested steps [" + std::to_string(s_step) +
                          ", " + std::to_string(t_step) + "] of " + std::to_string(sys.steps()));
  }
}

}  // namespace

FourierState tangent_step(const MalliavinSystem& sys, const StepFactors& f, std::size_t step,
                          const FourierState& eta) {
  const FourierState& u = sys.base.states[step];
  const FourierState lin = linearized_drift(sys.spec, u, eta);
  FourierState out(u.basis());
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = f.decay[k] * eta[k] - f.gain[k] * f.dt * lin[k];
  }
  return out;
}

FourierState tangent_step_adjoint(const MalliavinSystem& sys, const StepFactors& f,
                                  std::size_t step, const FourierState& a) {
  const FourierState& u = sys.base.states[step];
  FourierState scaled(u.basis());
  for (std::size_t k = 0; k < a.size(); ++k) scaled[k] = f.gain[k] * f.dt * a[k];
  const FourierState lin = linearized_drift_adjoint(sys.spec, u, scaled);
  FourierState out(u.basis());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = f.decay[k] * a[k] - lin[k];
  return out;
}

std::vector<FourierState> evolve_eta_from(const MalliavinSystem& sys, const FourierState& initial,
                                          std::size_t s_step, std::size_t t_step) {
  require_supported(sys.spec);
  check_range(sys, s_step, t_step);
  const StepFactors factors(sys.spec, sys.dt());
  std::vector<FourierState> path;
  path.reserve(t_step - s_step + 1);
  path.push_back(initial);
  for (std::size_t m = s_step; m < t_step; ++m) {
    path.push_back(tangent_step(sys, factors, m, path.back()));
  }
  return path;
}

std::vector<FourierState> evolve_eta(const MalliavinSystem& sys, std::size_t k,
                                     std::size_t s_step, std::size_t t_step) {
  return evolve_eta_from(sys, FourierState::unit(sys.spec.basis(), k), s_step, t_step);
}

double MalliavinMatrix::trace() const {
  double s = 0.0;
  for (std::size_t i = 0; i < d_; ++i) s += (*this)(i, i);
  return s;
}

double MalliavinMatrix::norm() const {
  double s = 0.0;
  for (double v : entries_) s += v * v;
  return std::sqrt(s);
}

double MalliavinMatrix::quadratic_form(std::span<const double> y) const {
  double s = 0.0;
  for (std::size_t i = 0; i < d_; ++i) {
    for (std::size_t j = 0; j < d_; ++j) s += y[i] * (*this)(i, j) * y[j];
  }
  return s;
}

std::vector<double> MalliavinMatrix::eigenvalues() const {
  if (d_ == 0) return {};
  Eigen::MatrixXd m(d_, d_);
  for (std::size_t i = 0; i < d_; ++i) {
    for (std::size_t j = 0; j < d_; ++j) m(i, j) = (*this)(i, j);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
  const auto& ev = solver.eigenvalues();
  return std::vector<double>(ev.data(), ev.data() + ev.size());
}

bool MalliavinMatrix::symmetric(double tol) const {
  for (std::size_t i = 0; i < d_; ++i) {
    for (std::size_t j = i + 1; j < d_; ++j) {
      if (std::abs((*this)(i, j) - (*this)(j, i)) > tol) return false;
    }
  }
  return true;
}

bool MalliavinMatrix::positive_semidefinite(double rel_tol) const {
  const auto ev = eigenvalues();
  return ev.empty() || ev.front() >= -rel_tol * norm();
}

SensitivityTable sensitivities(const MalliavinSystem& sys, std::size_t t_step) {
  require_supported(sys.spec);
  check_range(sys, 0, t_step);
  if (sys.stride == 0) throw InvalidArgument("start-time stride must be >= 1");
  SensitivityTable table;
  table.directions = sys.direction_set();
  if (table.directions.empty()) throw InvalidArgument("empty direction set K");
  table.d = sys.f.dim();
  for (std::size_t s = 0; s < t_step; s += sys.stride) table.s_steps.push_back(s);
  table.s_steps.push_back(t_step);
  const double dt = sys.dt();
  const std::size_t J = table.s_steps.size();
  table.s_weights.assign(J, 0.0);
  for (std::size_t j = 0; j + 1 < J; ++j) {
    const double h = double(table.s_steps[j + 1] - table.s_steps[j]) * dt;
    table.s_weights[j] += 0.5 * h;
    table.s_weights[j + 1] += 0.5 * h;
  }
  table.values.assign(J * table.directions.size() * table.d, 0.0);

  const StepFactors factors(sys.spec, dt);
  const auto grads = sys.f.gradient(sys.base.states[t_step]);
  if (grads.size() != table.d) throw InvalidArgument("functional gradient has wrong dimension");
  for (std::size_t i = 0; i < table.d; ++i) {
    FourierState a = grads[i];
    std::size_t j = J;
    for (std::size_t m = t_step + 1; m-- > 0;) {
      if (m < t_step) a = tangent_step_adjoint(sys, factors, m, a);
      if (j > 0 && table.s_steps[j - 1] == m) {
        --j;
        for (std::size_t kk = 0; kk < table.directions.size(); ++kk) {
          table.values[(j * table.directions.size() + kk) * table.d + i] = a[table.directions[kk]];
        }
      }
    }
  }
  return table;
}

MalliavinMatrix assemble_matrix(const SensitivityTable& table, const CovarianceSpec& cov) {
  MalliavinMatrix M(table.d);
  const std::size_t K = table.directions.size();
  for (std::size_t j = 0; j < table.s_steps.size(); ++j) {
    for (std::size_t kk = 0; kk < K; ++kk) {
      const double w = table.s_weights[j] * cov.variance(table.directions[kk]);
      if (w == 0.0) continue;
      for (std::size_t a = 0; a < table.d; ++a) {
        const double va = table.at(j, kk, a);
        for (std::size_t b = a; b < table.d; ++b) M(a, b) += w * va * table.at(j, kk, b);
      }
    }
  }
  for (std::size_t a = 0; a < table.d; ++a) {
    for (std::size_t b = 0; b < a; ++b) M(a, b) = M(b, a);
  }
  return M;
}

MalliavinMatrix assemble_matrix(const MalliavinSystem& sys, std::size_t t_step) {
  return assemble_matrix(sensitivities(sys, t_step), sys.spec.covariance);
}

MalliavinMatrix assemble_matrix_forward(const MalliavinSystem& sys, std::size_t t_step) {
  require_supported(sys.spec);
  check_range(sys, 0, t_step);
  SensitivityTable table;
  table.directions = sys.direction_set();
  if (table.directions.empty()) throw InvalidArgument("empty direction set K");
  table.d = sys.f.dim();
  for (std::size_t s = 0; s < t_step; s += sys.stride) table.s_steps.push_back(s);
  table.s_steps.push_back(t_step);
  const std::size_t J = table.s_steps.size();
  table.s_weights.assign(J, 0.0);
  for (std::size_t j = 0; j + 1 < J; ++j) {
    const double h = double(table.s_steps[j + 1] - table.s_steps[j]) * sys.dt();
    table.s_weights[j] += 0.5 * h;
    table.s_weights[j + 1] += 0.5 * h;
  }
  table.values.assign(J * table.directions.size() * table.d, 0.0);
  const auto grads = sys.f.gradient(sys.base.states[t_step]);
  for (std::size_t j = 0; j < J; ++j) {
    for (std::size_t kk = 0; kk < table.directions.size(); ++kk) {
      const auto path = evolve_eta(sys, table.directions[kk], table.s_steps[j], t_step);
      for (std::size_t i = 0; i < table.d; ++i) {
        table.values[(j * table.directions.size() + kk) * table.d + i] =
            inner_product(grads[i], path.back());
      }
    }
  }
  return assemble_matrix(table, sys.spec.covariance);
}

double malliavin_quadratic_form(const SensitivityTable& table, const CovarianceSpec& cov,
                                std::span<const double> y) {
  if (y.size() != table.d) throw InvalidArgument("vector dimension does not match f");
  double total = 0.0;
  for (std::size_t j = 0; j < table.s_steps.size(); ++j) {
    for (std::size_t kk = 0; kk < table.directions.size(); ++kk) {
      double s = 0.0;
      for (std::size_t i = 0; i < table.d; ++i) s += y[i] * table.at(j, kk, i);
      total += table.s_weights[j] * cov.variance(table.directions[kk]) * s * s;
    }
  }
  return total;
}

namespace {

void quantiles(std::vector<double> v, double out[5]) {
  if (v.empty()) return;
  std::sort(v.begin(), v.end());
  const double ps[5] = {0.0, 0.25, 0.5, 0.75, 1.0};
  for (int q = 0; q < 5; ++q) {
    const double pos = ps[q] * double(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    out[q] = v[lo] + (pos - double(lo)) * (v[hi] - v[lo]);
  }
}

}  // namespace

NondegeneracyReport nondegeneracy_report(std::span<const MalliavinMatrix> matrices,
                                         std::vector<double> relative_thresholds) {
  if (matrices.empty()) throw InvalidArgument("nondegeneracy report needs at least one matrix");
  NondegeneracyReport r;
  r.count = matrices.size();
  r.thresholds = std::move(relative_thresholds);
  r.fraction_below.assign(r.thresholds.size(), 0.0);
  std::vector<double> conds;
  for (const auto& M : matrices) {
    const auto ev = M.eigenvalues();
    const double lo = ev.front();
    const double hi = ev.back();
    const double tr = M.trace();
    const double rel = tr > 0.0 ? lo / tr : 0.0;
    r.min_eigenvalues.push_back(lo);
    r.relative_min.push_back(rel);
    conds.push_back(lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity());
    for (std::size_t t = 0; t < r.thresholds.size(); ++t) {
      if (!(rel > r.thresholds[t])) r.fraction_below[t] += 1.0;
    }
    if (tr <= 0.0 || (!r.thresholds.empty() && !(rel > r.thresholds.front()))) ++r.degenerate;
  }
  for (double& f : r.fraction_below) f /= double(r.count);
  quantiles(r.min_eigenvalues, r.min_quantiles);
  quantiles(conds, r.condition_quantiles);
  return r;
}

std::string NondegeneracyReport::text() const {
  std::ostringstream os;
  os.precision(8);
  os << "matrices = " << count << "\n";
  os << "degenerate = " << degenerate << "\n";
  os << "min_eigenvalue_quantiles(0,25,50,75,100%) =";
  for (double q : min_quantiles) os << " " << q;
  os << "\ncondition_number_quantiles(0,25,50,75,100%) =";
  for (double q : condition_quantiles) os << " " << q;
  os << "\n";
  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    os << "fraction_min_eig_below_" << thresholds[t] << "_trace = " << fraction_below[t] << "\n";
  }
  return os.str();
}

}  // namespace snslab
