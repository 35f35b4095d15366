#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "snslab/pseudospectral.hpp"
#include "snslab/spectral.hpp"

using namespace snslab;

namespace {

FourierState random_state(const BasisPtr& basis, std::mt19937_64& gen, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  FourierState u(basis);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = nd(gen);
  return u;
}

// Lattice points 0 < |k|^2 <= cutoff, grouped by |k|^2.
std::map<int, int> lattice_shells(int cutoff) {
  std::map<int, int> shells;
  const int m = static_cast<int>(std::sqrt(double(cutoff))) + 1;
  for (int a = -m; a <= m; ++a)
    for (int b = -m; b <= m; ++b)
      for (int c = -m; c <= m; ++c) {
        const int q = a * a + b * b + c * c;
        if (q > 0 && q <= cutoff) ++shells[q];
      }
  return shells;
}

}  // namespace

TEST_CASE("basis mode counts match brute-force lattice enumeration") {
  for (int cutoff : {1, 2, 3, 4, 5}) {
    const auto basis = build_basis(cutoff);
    // Each lattice point contributes two polarizations; the {k, -k} pair
    // folds into cos/sin parities, so 2 real modes per lattice point.
    std::map<int, int> expected;
    for (auto [q, count] : lattice_shells(cutoff)) expected[q] = 2 * count;
    std::map<int, int> got;
    for (const auto& m : basis->modes()) ++got[static_cast<int>(m.eigenvalue)];
    CHECK(got == expected);
  }
  CHECK(build_basis(1)->size() == 12);
  const auto b2 = build_basis(2);
  CHECK(b2->size() == 36);
  CHECK(std::count(b2->eigenvalues().begin(), b2->eigenvalues().end(), 1.0) == 12);
  CHECK(std::count(b2->eigenvalues().begin(), b2->eigenvalues().end(), 2.0) == 24);
}

TEST_CASE("basis invariants") {
  const auto basis = build_basis(4);
  CHECK(basis->eigenvalues()[0] == 1.0);
  for (std::size_t i = 0; i < basis->size(); ++i) {
    const auto& m = basis->mode(i);
    const double k2 = m.k[0] * m.k[0] + m.k[1] * m.k[1] + m.k[2] * m.k[2];
    CHECK(k2 > 0);
    CHECK(m.eigenvalue == k2);
    const double dot = m.direction[0] * m.k[0] + m.direction[1] * m.k[1] + m.direction[2] * m.k[2];
    CHECK(std::abs(dot) < 1e-14);
    const double norm = std::hypot(m.direction[0], m.direction[1], m.direction[2]);
    CHECK(std::abs(norm - 1.0) < 1e-14);
    if (i > 0) CHECK(basis->eigenvalues()[i - 1] <= basis->eigenvalues()[i]);
    const std::size_t other = basis->find(m.k, 3 - m.polarization, m.parity);
    REQUIRE(other < basis->size());
    const auto& d2 = basis->mode(other).direction;
    CHECK(std::abs(m.direction[0] * d2[0] + m.direction[1] * d2[1] + m.direction[2] * d2[2]) <
          1e-14);
    CHECK(basis->find(m.k, m.polarization, m.parity) == i);
  }
  CHECK_THROWS_AS(build_basis(0), InvalidArgument);
  CHECK(build_basis(4)->describe() == basis->describe());
}

TEST_CASE("basis is orthonormal under grid quadrature") {
  const auto basis = build_basis(2);
  const PhysicalGrid grid(basis);
  for (std::size_t i = 0; i < basis->size(); ++i) {
    for (std::size_t j = 0; j < basis->size(); ++j) {
      const double ip =
          grid.inner_product(FourierState::unit(basis, i), FourierState::unit(basis, j));
      CHECK(std::abs(ip - (i == j ? 1.0 : 0.0)) < 1e-12);
    }
  }
}

TEST_CASE("inner product matches physical quadrature") {
  std::mt19937_64 gen(11);
  for (int cutoff : {1, 2, 4}) {
    const auto basis = build_basis(cutoff);
    const PhysicalGrid grid(basis);
    for (int trial = 0; trial < 5; ++trial) {
      const auto u = random_state(basis, gen);
      const auto v = random_state(basis, gen);
      CHECK(std::abs(inner_product(u, v) - grid.inner_product(u, v)) < 1e-8);
      CHECK(inner_product(u, v) == doctest::Approx(inner_product(v, u)).epsilon(1e-15));
    }
  }
  const auto basis = build_basis(2);
  CHECK(inner_product(FourierState::unit(basis, 3), FourierState::unit(basis, 3)) == 1.0);
  CHECK(inner_product(FourierState::unit(basis, 3), FourierState::unit(basis, 4)) == 0.0);
  CHECK_THROWS_AS(inner_product(FourierState(build_basis(1)), FourierState(basis)), BasisMismatch);
}

TEST_CASE("sobolev norms, Stokes operator and semigroup") {
  std::mt19937_64 gen(5);
  const auto basis = build_basis(2);
  const auto u = random_state(basis, gen);
  double h = 0, v = 0, d = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double l = basis->eigenvalues()[i];
    h += u[i] * u[i];
    v += l * u[i] * u[i];
    d += l * l * u[i] * u[i];
  }
  CHECK(sobolev_norm(u, 0.0) == doctest::Approx(std::sqrt(h)).epsilon(1e-14));
  CHECK(sobolev_norm(u, 0.5) == doctest::Approx(std::sqrt(v)).epsilon(1e-14));
  CHECK(sobolev_norm(u, 1.0) == doctest::Approx(std::sqrt(d)).epsilon(1e-14));
  CHECK(sobolev_norm(stokes_apply(u, 1.0), 0.0) ==
        doctest::Approx(sobolev_norm(u, 1.0)).epsilon(1e-14));
  const auto e = semigroup_apply(u, 0.3, 0.7);
  for (std::size_t i = 0; i < u.size(); ++i) {
    CHECK(e[i] == doctest::Approx(std::exp(-0.7 * 0.3 * basis->eigenvalues()[i]) * u[i]));
  }
  const auto e2 = semigroup_apply(semigroup_apply(u, 0.1, 0.7), 0.2, 0.7);
  for (std::size_t i = 0; i < u.size(); ++i) CHECK(std::abs(e2[i] - e[i]) < 1e-14);
  CHECK_THROWS_AS(semigroup_apply(u, -1.0, 1.0), InvalidArgument);
  std::vector<double> bad(u.size(), 0.0);
  bad[0] = std::nan("");
  CHECK_THROWS_AS(FourierState(basis, bad), InvalidArgument);
  CHECK_THROWS_AS(FourierState(basis, std::vector<double>(3)), InvalidArgument);
}

TEST_CASE("bilinear term vanishes at cutoff 1") {
  std::mt19937_64 gen(3);
  const auto basis = build_basis(1);
  CHECK(basis->triads().empty());
  const auto u = random_state(basis, gen);
  const auto b = bilinear(u);
  for (std::size_t i = 0; i < b.size(); ++i) CHECK(b[i] == 0.0);
}

TEST_CASE("bilinear term matches the pseudospectral oracle") {
  std::mt19937_64 gen(7);
  for (int cutoff : {2, 3, 4}) {
    const auto basis = build_basis(cutoff);
    const PhysicalGrid grid(basis);
    for (int trial = 0; trial < 3; ++trial) {
      const auto u = random_state(basis, gen);
      const auto v = random_state(basis, gen);
      const auto fast = bilinear(u, v);
      const auto slow = grid.bilinear(u, v);
      double err = 0.0;
      for (std::size_t i = 0; i < fast.size(); ++i) err = std::max(err, std::abs(fast[i] - slow[i]));
      CHECK(err < 1e-8);
    }
  }
}

TEST_CASE("bilinear identities") {
  std::mt19937_64 gen(13);
  const auto basis = build_basis(4);
  for (int trial = 0; trial < 20; ++trial) {
    const auto u = random_state(basis, gen);
    const auto v = random_state(basis, gen);
    const auto w = random_state(basis, gen);
    const double scale = sobolev_norm(u, 0) * sobolev_norm(v, 0) *
                         (sobolev_norm(u, 0) + sobolev_norm(v, 0));
    CHECK(std::abs(inner_product(bilinear(u, v), v)) <= 1e-12 * scale);
    CHECK(std::abs(inner_product(bilinear(u, v), w) + inner_product(bilinear(u, w), v)) <=
          1e-12 * scale * sobolev_norm(w, 0));
    CHECK(inner_product(bilinear_adjoint_left(w, v), u) ==
          doctest::Approx(inner_product(w, bilinear(u, v))).epsilon(1e-12));
    CHECK(inner_product(bilinear_adjoint_right(w, u), v) ==
          doctest::Approx(inner_product(w, bilinear(u, v))).epsilon(1e-12));
  }
}

TEST_CASE("prefix basis restricts the Galerkin system") {
  std::mt19937_64 gen(17);
  const auto full = build_basis(2);
  const auto pre = full->prefix(20);
  CHECK(pre->size() == 20);
  FourierState u(pre), v(pre), uf(full), vf(full);
  std::normal_distribution<double> nd;
  for (std::size_t i = 0; i < 20; ++i) {
    u[i] = uf[i] = nd(gen);
    v[i] = vf[i] = nd(gen);
  }
  const auto b = bilinear(u, v);
  const auto bf = bilinear(uf, vf);
  for (std::size_t i = 0; i < 20; ++i) CHECK(std::abs(b[i] - bf[i]) < 1e-14);
  CHECK(galerkin_basis(2, 20)->size() == 20);
}

TEST_CASE("cutoff profile") {
  const CutoffProfile chi;
  CHECK(chi.value(-3.0) == 1.0);
  CHECK(chi.value(1.0) == 1.0);
  CHECK(chi.value(2.0) == 0.0);
  CHECK(chi.value(5.0) == 0.0);
  double prev = 1.0;
  for (double s = 1.0; s <= 2.0; s += 0.01) {
    const double c = chi.value(s);
    CHECK(c <= prev + 1e-15);
    CHECK(c >= 0.0);
    prev = c;
    if (s > 1.02 && s < 1.98) {
      const double fd = (chi.value(s + 1e-6) - chi.value(s - 1e-6)) / 2e-6;
      CHECK(chi.derivative(s) == doctest::Approx(fd).epsilon(1e-6));
    }
  }
  CHECK(chi.derivative(0.5) == 0.0);
  CHECK(chi.derivative(2.5) == 0.0);
}

TEST_CASE("truncated bilinear and its derivative") {
  std::mt19937_64 gen(19);
  const auto basis = build_basis(2);
  auto u = random_state(basis, gen, 0.2);
  const double au2 = std::pow(sobolev_norm(u, 1.0), 2);
  SUBCASE("chi equals 1 below R") {
    const auto t = truncated_bilinear(u, 2.0 * au2);
    CHECK(t == bilinear(u));
  }
  SUBCASE("chi vanishes above 2R") {
    const auto t = truncated_bilinear(u, au2 / 2.0);
    for (std::size_t i = 0; i < t.size(); ++i) CHECK(t[i] == 0.0);
  }
  SUBCASE("derivative matches central differences in the transition band") {
    const double R = au2 / 1.5;
    const auto theta = random_state(basis, gen);
    const double d = 1e-6;
    const auto fd = (1.0 / (2 * d)) * (truncated_bilinear(u + d * theta, R) -
                                       truncated_bilinear(u - d * theta, R));
    const auto an = truncated_bilinear_derivative(u, theta, R);
    for (std::size_t i = 0; i < fd.size(); ++i) CHECK(std::abs(fd[i] - an[i]) < 1e-7);
    const auto w = random_state(basis, gen);
    CHECK(inner_product(truncated_bilinear_derivative_adjoint(u, w, R), theta) ==
          doctest::Approx(inner_product(w, an)).epsilon(1e-12));
  }
}
