#include <doctest.h>

#include <cmath>
#include <random>

#include "snslab/dynamics.hpp"
#include "snslab/ensemble.hpp"
#include "snslab/stats.hpp"

using namespace snslab;

namespace {

FourierState random_state(const BasisPtr& basis, std::uint64_t seed, double scale) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd(0.0, scale);
  FourierState u(basis);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = nd(gen);
  return u;
}

CovarianceSpec zero_noise(const BasisPtr& basis) {
  return CovarianceSpec::explicit_list(basis, std::vector<double>(basis->size(), 0.0));
}

}  // namespace

TEST_CASE("single-mode linear decay is exact") {
  const auto basis = build_basis(2);
  DynamicsSpec spec(zero_noise(basis), 0.8);
  const std::size_t k = 20;
  const auto x = FourierState::unit(basis, k, 1.3);
  TrajectoryOptions opts;
  opts.record_every_step = true;
  const auto rec = run_trajectory(x, spec, 1.0, 1e-2, opts, 1, 0);
  const double lambda = basis->eigenvalues()[k];
  for (std::size_t i = 0; i < rec.states.size(); ++i) {
    const double exact = 1.3 * std::exp(-0.8 * lambda * rec.times[i]);
    CHECK(std::abs(rec.states[i][k] - exact) < 1e-14);
    for (std::size_t j = 0; j < basis->size(); ++j) {
      if (j != k) CHECK(rec.states[i][j] == 0.0);
    }
  }
}

TEST_CASE("truncated variant above 2R is pure heat decay") {
  const auto basis = build_basis(2);
  DynamicsSpec spec(zero_noise(basis), 1.0);
  spec.variant = Variant::Truncated;
  const auto x = random_state(basis, 1, 1.0);
  const double ax = std::pow(sobolev_norm(x, 1.0), 2);
  spec.R = ax / 2.5;
  std::vector<double> dW(basis->size(), 0.0);
  const auto next = step(x, spec, 0.0, 1e-3, dW);
  const auto heat = semigroup_apply(x, 1e-3, 1.0);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(next[i] - heat[i]) < 1e-15);
  TrajectoryOptions opts;
  const auto rec = run_trajectory(x, spec, 1.0, 1e-2, opts, 1, 0);
  CHECK(rec.tau_R == 0.0);
  CHECK(rec.tau_step == 0);
}

TEST_CASE("drift integration converges with order one") {
  const auto basis = build_basis(2);
  DynamicsSpec spec(zero_noise(basis), 1.0);
  const auto x = random_state(basis, 2, 1.5);
  auto endpoint = [&](double dt) {
    return run_trajectory(x, spec, 0.5, dt, {}, 0, 0).final_state();
  };
  const auto ref = endpoint(0.5 / 4096);
  std::vector<double> err;
  for (double dt : {0.5 / 32, 0.5 / 64, 0.5 / 128}) err.push_back(sobolev_norm(endpoint(dt) - ref, 0));
  CHECK(err[0] > 0.0);
  CHECK(err[0] / err[1] == doctest::Approx(2.0).epsilon(0.1));
  CHECK(err[1] / err[2] == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("galerkin and truncated paths coincide before tau_R") {
  const auto basis = build_basis(2);
  const auto cov = CovarianceSpec::power_law(basis, 1.0);
  DynamicsSpec gal(cov, 1.0);
  DynamicsSpec tr = gal;
  tr.variant = Variant::Truncated;
  const auto x = random_state(basis, 3, 0.5);
  TrajectoryOptions opts;
  opts.record_every_step = true;
  opts.tau_threshold = std::pow(sobolev_norm(x, 1.0), 2) * 1.5;
  tr.R = *opts.tau_threshold;
  const auto a = run_trajectory(x, gal, 1.0, 1e-3, opts, 77, 4);
  const auto b = run_trajectory(x, tr, 1.0, 1e-3, opts, 77, 4);
  REQUIRE(a.tau_step == b.tau_step);
  const std::size_t upto = std::min(a.tau_step, a.states.size() - 1);
  for (std::size_t n = 0; n <= upto; ++n) CHECK(a.states[n] == b.states[n]);
  if (a.tau_step < a.states.size()) {
    const double au = sobolev_norm(a.states[a.tau_step], 1.0);
    CHECK(au * au >= tr.R);
    for (std::size_t n = 0; n < a.tau_step; ++n) CHECK(std::pow(sobolev_norm(a.states[n], 1.0), 2) < tr.R);
  }
}

TEST_CASE("tau_R is monotone in R on a fixed path") {
  const auto basis = build_basis(2);
  DynamicsSpec spec(CovarianceSpec::power_law(basis, 1.0), 1.0);
  const auto x = random_state(basis, 9, 0.3);
  double prev = 0.0;
  for (double R : {0.5, 1.0, 2.0, 4.0, 8.0}) {
    TrajectoryOptions opts;
    opts.tau_threshold = R;
    const auto rec = run_trajectory(x, spec, 1.0, 1e-3, opts, 5, 5);
    CHECK(rec.tau_R >= prev);
    prev = rec.tau_R;
  }
}

TEST_CASE("split path coincides with galerkin before the switch") {
  const auto basis = build_basis(2);
  const auto cov = CovarianceSpec::power_law(basis, 3.0);
  DynamicsSpec gal(cov, 1.0);
  DynamicsSpec sp = gal;
  sp.variant = Variant::Split;
  sp.F = {0, 1};
  sp.epsilon = 0.25;
  const auto x = random_state(basis, 4, 1.0);
  TrajectoryOptions opts;
  opts.record_every_step = true;
  for (auto mode : {SplitMode::Plain, SplitMode::StationaryCompensated}) {
    sp.split_mode = mode;
    const auto a = run_trajectory(x, gal, 1.0, 1.0 / 64, opts, 3, 1);
    const auto b = run_trajectory(x, sp, 1.0, 1.0 / 64, opts, 3, 1);
    CHECK(b.split_step == 48);
    CHECK(b.epsilon_rounded == 0.25);
    for (std::size_t n = 0; n <= b.split_step; ++n) CHECK(a.states[n] == b.states[n]);
    CHECK_FALSE(a.final_state() == b.final_state());
    // Only the F components feel the switch directly; the rest follows through coupling.
  }
  sp.epsilon = 1.5;
  CHECK_THROWS_AS(run_trajectory(x, sp, 1.0, 1e-2, opts, 0, 0), InvalidArgument);
}

TEST_CASE("integration failure carries the time") {
  const auto basis = build_basis(2);
  DynamicsSpec spec(zero_noise(basis), 1.0);
  const auto x = random_state(basis, 8, 1e6);
  try {
    run_trajectory(x, spec, 1.0, 0.1, {}, 0, 0);
    FAIL("expected an integration failure");
  } catch (const IntegrationError& e) {
    CHECK(e.time() >= 0.0);
  }
}

TEST_CASE("ensembles are deterministic and schedule independent") {
  const auto basis = build_basis(2);
  DynamicsSpec spec(CovarianceSpec::power_law(basis, 3.0), 1.0);
  const auto x = random_state(basis, 5, 0.5);
  EnsembleOptions o1, o3;
  o1.workers = 1;
  o3.workers = 3;
  o1.trajectory.snapshot_times = o3.trajectory.snapshot_times = {0.5, 1.0};
  const auto a = run_ensemble(x, spec, 1.0, 1e-2, 12, 99, o1);
  const auto b = run_ensemble(x, spec, 1.0, 1e-2, 12, 99, o3);
  REQUIRE(a.ok());
  for (std::size_t i = 0; i < 12; ++i) CHECK(a.records[i].states == b.records[i].states);
  const auto single = run_trajectory(x, spec, 1.0, 1e-2, o1.trajectory, 99, 0);
  CHECK(single.states == a.records[0].states);
  CHECK(a.records[0].times == std::vector<double>{0.0, 0.5, 1.0});
  CHECK_THROWS_AS(run_ensemble(x, spec, 1.0, 1e-2, 0, 99, o1), InvalidArgument);
}

TEST_CASE("ensemble failures are aggregated") {
  const auto basis = build_basis(2);
  DynamicsSpec spec(zero_noise(basis), 1.0);
  const auto x = random_state(basis, 8, 1e6);
  const auto r = run_ensemble(x, spec, 1.0, 0.1, 3, 1, {});
  CHECK(r.failures.size() == 3);
  CHECK_THROWS_AS(r.require_ok(), Error);
}

TEST_CASE("linear stationary ensemble matches OU variance") {
  const auto basis = build_basis(1);
  DynamicsSpec spec(CovarianceSpec::power_law(basis, 3.0), 1.0);
  spec.nonlinear = false;
  const auto res = run_stationary_ensemble(spec, 4.0, 0.5, 1e-2, 2000, 17);
  double target = 0.0;
  for (std::size_t k = 0; k < basis->size(); ++k) {
    target += spec.covariance.variance(k) / (2.0 * basis->eigenvalues()[k]);
  }
  std::vector<double> e;
  for (const auto& r : res.ensemble.records) e.push_back(std::pow(sobolev_norm(r.final_state(), 0), 2));
  const auto m = stats::mean_estimate(e);
  CHECK(std::abs(m.mean - target) < 3 * m.std_error);
  CHECK_FALSE(res.diagnostic.warning);

  DynamicsSpec quiet(zero_noise(basis), 1.0);
  const auto z = run_stationary_ensemble(quiet, 1.0, 0.5, 1e-2, 3, 1);
  for (const auto& r : z.ensemble.records) CHECK(sobolev_norm(r.final_state(), 0) == 0.0);
}

TEST_CASE("energy identity on a small ensemble") {
  const auto basis = build_basis(2);
  DynamicsSpec spec(CovarianceSpec::power_law(basis, 3.0), 1.0);
  const auto x = random_state(basis, 6, 0.5);
  EnsembleOptions o;
  o.trajectory.snapshot_times = {0.5, 1.0};
  o.trajectory.track_dissipation = true;
  const auto ens = run_ensemble(x, spec, 1.0, 1e-3, 400, 21, o);
  const double x2 = std::pow(sobolev_norm(x, 0), 2);
  for (std::size_t s = 1; s < 3; ++s) {
    std::vector<double> r;
    for (const auto& rec : ens.records) {
      r.push_back(std::pow(sobolev_norm(rec.states[s], 0), 2) - x2 +
                  2.0 * spec.viscosity * rec.dissipation[s] - rec.times[s] * spec.covariance.trace());
    }
    const auto m = stats::mean_estimate(r);
    CHECK(std::abs(m.mean) < 3.0 * m.std_error);
  }
}

TEST_CASE("noise sources") {
  const CounterNoise a(1, 2, 0.01);
  std::vector<double> x(5), y(5);
  a.increment(3, x);
  a.increment(3, y);
  CHECK(x == y);
  const BumpedNoise b(a, 3, 2, 0.5);
  b.increment(3, y);
  CHECK(y[2] == doctest::Approx(x[2] + 0.5));
  CHECK(y[1] == x[1]);
  b.increment(4, y);
  a.increment(4, x);
  CHECK(x == y);
  CHECK(grid_steps(1.0, 1e-3, "horizon") == 1000);
  CHECK_THROWS_AS(grid_steps(1.0, 0.3, "horizon"), InvalidArgument);
}
