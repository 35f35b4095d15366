#include "snslab/pseudospectral.hpp"

#include <cmath>
#include <complex>
#include <numbers>

namespace snslab {

PhysicalGrid::PhysicalGrid(BasisPtr basis, int n) : basis_(std::move(basis)), n_(n) {
  const int minimum = 3 * basis_->max_component() + 1;
  if (n_ == 0) n_ = minimum;
  if (n_ < minimum) {
    throw InvalidArgument("grid of " + std::to_string(n_) + " points per axis aliases; need " +
                          std::to_string(minimum));
  }
  const double h = 2.0 * std::numbers::pi / n_;
  const double r2 = std::sqrt(2.0);
  mode_values_.resize(basis_->size());
  mode_derivs_.resize(basis_->size());
  for (std::size_t m = 0; m < basis_->size(); ++m) {
    const Mode& mode = basis_->mode(m);
    auto& val = mode_values_[m];
    auto& der = mode_derivs_[m];
    val.resize(points());
    der.resize(points());
    std::size_t p = 0;
    for (int a = 0; a < n_; ++a) {
      for (int b = 0; b < n_; ++b) {
        for (int c = 0; c < n_; ++c, ++p) {
          const double phase = h * (mode.k[0] * a + mode.k[1] * b + mode.k[2] * c);
          if (mode.parity == Parity::Cos) {
            val[p] = r2 * std::cos(phase);
            der[p] = -r2 * std::sin(phase);
          } else {
            val[p] = r2 * std::sin(phase);
            der[p] = r2 * std::cos(phase);
          }
        }
      }
    }
  }
}

std::vector<Vec3> PhysicalGrid::velocity(const FourierState& u) const {
  std::vector<Vec3> out(points(), Vec3{0.0, 0.0, 0.0});
  for (std::size_t m = 0; m < basis_->size(); ++m) {
    if (u[m] == 0.0) continue;
    const Vec3& a = basis_->mode(m).direction;
    const auto& val = mode_values_[m];
    for (std::size_t p = 0; p < out.size(); ++p) {
      for (int i = 0; i < 3; ++i) out[p][i] += u[m] * a[i] * val[p];
    }
  }
  return out;
}

std::vector<std::array<Vec3, 3>> PhysicalGrid::gradient(const FourierState& u) const {
  std::vector<std::array<Vec3, 3>> out(points());
  for (auto& g : out) {
    for (auto& row : g) row = {0.0, 0.0, 0.0};
  }
  for (std::size_t m = 0; m < basis_->size(); ++m) {
    if (u[m] == 0.0) continue;
    const Mode& mode = basis_->mode(m);
    const auto& der = mode_derivs_[m];
    for (std::size_t p = 0; p < out.size(); ++p) {
      const double s = u[m] * der[p];
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) out[p][i][j] += s * mode.direction[i] * mode.k[j];
      }
    }
  }
  return out;
}

double PhysicalGrid::inner_product(const FourierState& u, const FourierState& v) const {
  const auto fu = velocity(u);
  const auto fv = velocity(v);
  double s = 0.0;
  for (std::size_t p = 0; p < fu.size(); ++p) {
    s += fu[p][0] * fv[p][0] + fu[p][1] * fv[p][1] + fu[p][2] * fv[p][2];
  }
  return s / double(points());
}

FourierState PhysicalGrid::project(const std::vector<Vec3>& field) const {
  if (field.size() != points()) throw InvalidArgument("field does not match grid size");
  FourierState out(basis_);
  const double h = 2.0 * std::numbers::pi / n_;
  const double r2 = std::sqrt(2.0);
  for (std::size_t m = 0; m < basis_->size(); ++m) {
    const Mode& mode = basis_->mode(m);
    // hat w(k) = avg w(x) exp(-i k.x)
    std::array<std::complex<double>, 3> hat{};
    std::size_t p = 0;
    for (int a = 0; a < n_; ++a) {
      for (int b = 0; b < n_; ++b) {
        for (int c = 0; c < n_; ++c, ++p) {
          const double phase = h * (mode.k[0] * a + mode.k[1] * b + mode.k[2] * c);
          const std::complex<double> e{std::cos(phase), -std::sin(phase)};
          for (int i = 0; i < 3; ++i) hat[i] += field[p][i] * e;
        }
      }
    }
    for (auto& c : hat) c /= double(points());
    const double k2 = mode.eigenvalue;
    std::complex<double> kdot{0.0, 0.0};
    for (int i = 0; i < 3; ++i) kdot += double(mode.k[i]) * hat[i];
    for (int i = 0; i < 3; ++i) hat[i] -= double(mode.k[i]) * kdot / k2;
    std::complex<double> along{0.0, 0.0};
    for (int i = 0; i < 3; ++i) along += mode.direction[i] * hat[i];
    // avg w cos(k.x) = Re hat, avg w sin(k.x) = -Im hat
    out[m] = mode.parity == Parity::Cos ? r2 * along.real() : -r2 * along.imag();
  }
  return out;
}

FourierState PhysicalGrid::bilinear(const FourierState& u, const FourierState& v) const {
  const auto fu = velocity(u);
  const auto gv = gradient(v);
  std::vector<Vec3> adv(points());
  for (std::size_t p = 0; p < adv.size(); ++p) {
    for (int i = 0; i < 3; ++i) {
      adv[p][i] = fu[p][0] * gv[p][i][0] + fu[p][1] * gv[p][i][1] + fu[p][2] * gv[p][i][2];
    }
  }
  return project(adv);
}

}  // namespace snslab
