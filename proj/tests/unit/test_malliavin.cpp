#include <doctest.h>

#include <cmath>
#include <random>

#include "snslab/malliavin.hpp"

using namespace snslab;

namespace {

FourierState random_state(const BasisPtr& basis, std::uint64_t seed, double scale) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd(0.0, scale);
  FourierState u(basis);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = nd(gen);
  return u;
}

DynamicsSpec truncated_spec(int cutoff, double R) {
  DynamicsSpec spec(CovarianceSpec::power_law(build_basis(cutoff), 2.0), 1.0);
  spec.variant = Variant::Truncated;
  spec.R = R;
  return spec;
}

}  // namespace

TEST_CASE("eta is the heat flow when the cutoff vanishes") {
  auto spec = truncated_spec(2, 1e-9);
  const auto x = random_state(spec.basis(), 1, 1.0);
  auto sys = make_malliavin_system(x, spec, 0.5, 1e-2, Functional::coordinates({0, 1}), 3, 0);
  for (std::size_t k : {0u, 17u}) {
    const auto path = evolve_eta(sys, k, 10, 50);
    for (std::size_t m = 0; m < path.size(); ++m) {
      const auto heat = semigroup_apply(FourierState::unit(spec.basis(), k), double(m) * 1e-2, 1.0);
      for (std::size_t i = 0; i < heat.size(); ++i) CHECK(std::abs(path[m][i] - heat[i]) < 1e-14);
    }
  }
}

TEST_CASE("eta is linear in its initial direction") {
  auto spec = truncated_spec(2, 1e3);
  const auto x = random_state(spec.basis(), 2, 1.0);
  auto sys = make_malliavin_system(x, spec, 0.5, 1e-2, Functional::coordinates({0}), 3, 0);
  const auto a = evolve_eta(sys, 3, 5, 50).back();
  const auto b = evolve_eta(sys, 30, 5, 50).back();
  const auto ab = evolve_eta_from(
      sys, FourierState::unit(spec.basis(), 3) + FourierState::unit(spec.basis(), 30), 5, 50).back();
  for (std::size_t i = 0; i < ab.size(); ++i) CHECK(std::abs(ab[i] - a[i] - b[i]) < 1e-12);
  CHECK_THROWS_AS(evolve_eta(sys, 3, 40, 60), InvalidArgument);
}

TEST_CASE("tangent map is the derivative of the discrete flow") {
  // Bumping the white increment of step n by delta moves u_{n+1} by
  // gain * sigma_k * delta in direction q_k; the rest is the tangent flow.
  auto spec = truncated_spec(2, 1e3);
  const double dt = 1e-3;
  const auto x = random_state(spec.basis(), 3, 1.0);
  TrajectoryOptions opts;
  opts.record_every_step = true;
  const CounterNoise base(4, 0, dt);
  MalliavinSystem sys(spec, run_trajectory(x, spec, 0.5, dt, opts, base),
                      Functional::coordinates({0}));
  const StepFactors factors(spec, dt);
  const std::size_t n = 200;
  for (std::size_t k : {0u, 7u, 25u}) {
    const double delta = 1e-5;
    const auto up = run_trajectory(x, spec, 0.5, dt, {}, BumpedNoise(base, n, k, delta)).final_state();
    const auto dn = run_trajectory(x, spec, 0.5, dt, {}, BumpedNoise(base, n, k, -delta)).final_state();
    const auto fd = (1.0 / (2 * delta)) * (up - dn);
    const auto start =
        FourierState::unit(spec.basis(), k, factors.gain[k] * spec.covariance.stddev(k));
    const auto eta = evolve_eta_from(sys, start, n + 1, sys.steps()).back();
    const double scale = sobolev_norm(eta, 0);
    CHECK(sobolev_norm(fd - eta, 0) < 1e-7 * scale);
    // Continuous-time derivative sigma_k eta_k(t, s) differs by the gain factor only.
    const auto cont = spec.covariance.stddev(k) * evolve_eta(sys, k, n + 1, sys.steps()).back();
    CHECK(sobolev_norm(fd - cont, 0) < 2e-3 * scale);
  }
}

TEST_CASE("adjoint step is the transpose of the tangent step") {
  auto spec = truncated_spec(2, 0.0);
  const auto x = random_state(spec.basis(), 5, 0.4);
  spec.R = std::pow(sobolev_norm(x, 1.0), 2) / 1.4;
  auto sys = make_malliavin_system(x, spec, 0.1, 1e-2, Functional::coordinates({0}), 3, 0);
  const StepFactors f(spec, 1e-2);
  const auto a = random_state(spec.basis(), 6, 1.0);
  const auto e = random_state(spec.basis(), 7, 1.0);
  CHECK(inner_product(a, tangent_step(sys, f, 0, e)) ==
        doctest::Approx(inner_product(tangent_step_adjoint(sys, f, 0, a), e)).epsilon(1e-12));
}

TEST_CASE("malliavin matrix in the linear regime") {
  const auto basis = build_basis(2);
  DynamicsSpec spec(CovarianceSpec::power_law(basis, 3.0), 0.9);
  spec.variant = Variant::Truncated;
  spec.R = 1e3;
  spec.nonlinear = false;
  const auto x = random_state(basis, 8, 0.5);
  const double dt = 1e-3;
  auto sys = make_malliavin_system(x, spec, 1.0, dt, Functional::coordinates({0, 20}), 3, 0);
  const auto M = assemble_matrix(sys, sys.steps());
  CHECK(M.symmetric());
  for (std::size_t i = 0; i < 2; ++i) {
    const std::size_t k = sys.f.dim() == 2 ? (i == 0 ? 0 : 20) : 0;
    const double r = 2 * 0.9 * basis->eigenvalues()[k];
    const double closed = spec.covariance.variance(k) * (1 - std::exp(-r)) / r;
    CHECK(M(i, i) == doctest::Approx(closed).epsilon(1e-6));
  }
  CHECK(std::abs(M(0, 1)) < 1e-15);
}

TEST_CASE("malliavin matrix assembly properties") {
  auto spec = truncated_spec(2, 1e3);
  const auto x = random_state(spec.basis(), 9, 1.0);
  auto sys = make_malliavin_system(x, spec, 0.3, 1e-2, Functional::coordinates({0, 5, 14}), 3, 0);
  sys.stride = 2;
  const std::size_t t = sys.steps();
  const auto table = sensitivities(sys, t);
  const auto M = assemble_matrix(table, spec.covariance);
  const auto Mf = assemble_matrix_forward(sys, t);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(M(i, j) - Mf(i, j)) < 1e-12 * M.norm());
  CHECK(M.symmetric());
  CHECK(M.positive_semidefinite());
  std::mt19937_64 gen(1);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 10; ++trial) {
    const std::vector<double> y = {nd(gen), nd(gen), nd(gen)};
    CHECK(std::abs(M.quadratic_form(y) - malliavin_quadratic_form(table, spec.covariance, y)) <
          1e-12 * M.norm());
  }
  // Enlarging K adds PSD terms.
  sys.directions = {0, 1, 2, 3, 4, 5};
  const auto small = assemble_matrix(sys, t).eigenvalues();
  sys.directions = {0, 1, 2, 3, 4, 5, 14, 20};
  const auto big = assemble_matrix(sys, t).eigenvalues();
  for (std::size_t i = 0; i < 3; ++i) CHECK(big[i] >= small[i] - 1e-15);
  sys.directions = {};
  // Stride refinement converges.
  sys.stride = 1;
  const auto fine = assemble_matrix(sys, t);
  CHECK(std::abs(fine(0, 0) - M(0, 0)) < 1e-2 * M(0, 0));
}

TEST_CASE("degenerate and nondegenerate functionals") {
  auto spec = truncated_spec(2, 1e3);
  const auto x = random_state(spec.basis(), 10, 1.0);
  auto sys = make_malliavin_system(x, spec, 0.2, 1e-2, Functional::constant(2.0), 3, 0);
  const auto Z = assemble_matrix(sys, sys.steps());
  CHECK(Z(0, 0) == 0.0);
  std::vector<MalliavinMatrix> ms = {Z};
  CHECK(nondegeneracy_report(ms).degenerate == 1);

  std::vector<MalliavinMatrix> norms;
  for (std::uint64_t path = 0; path < 5; ++path) {
    auto s = make_malliavin_system(x, spec, 0.2, 1e-2, Functional::squared_norm(), 3, path);
    norms.push_back(assemble_matrix(s, s.steps()));
  }
  const auto rep = nondegeneracy_report(norms);
  CHECK(rep.degenerate == 0);
  for (double e : rep.min_eigenvalues) CHECK(e > 0.0);
  CHECK(!rep.text().empty());

  std::vector<double> v(spec.basis()->size(), 1.0);
  v[0] = v[1] = 0.0;
  DynamicsSpec quiet(CovarianceSpec::explicit_list(spec.basis(), v), 1.0);
  quiet.nonlinear = false;
  auto qs = make_malliavin_system(x, quiet, 0.2, 1e-2, Functional::coordinates({0, 1}), 3, 0);
  const auto Q = assemble_matrix(qs, qs.steps());
  CHECK(Q.norm() == 0.0);
  std::vector<MalliavinMatrix> qm = {Q};
  CHECK(nondegeneracy_report(qm).degenerate == 1);
  qs.directions = {};
  CHECK_THROWS_AS(nondegeneracy_report(std::span<const MalliavinMatrix>{}), InvalidArgument);

  DynamicsSpec split = spec;
  split.variant = Variant::Split;
  split.F = {0};
  split.epsilon = 0.1;
  auto ss = make_malliavin_system(x, split, 0.2, 1e-2, Functional::coordinates({0}), 3, 0);
  CHECK_THROWS_AS(assemble_matrix(ss, ss.steps()), InvalidArgument);
}
