#pragma once

#include <vector>

#include "snslab/spectral.hpp"

namespace snslab {

/// Physical-space cross-check path for the spectral operators.
///
/// Fields are evaluated on a uniform n^3 grid of [0, 2pi)^3, products are
/// formed pointwise, and results are transformed back by direct discrete
/// Fourier sums over the basis wavevectors. With n >= 3 * max|k_i| + 1 every
/// quadrature is exact (no aliasing), which is what the default grid uses.
class PhysicalGrid {
 public:
  PhysicalGrid(BasisPtr basis, int n = 0);

  int n() const { return n_; }
  std::size_t points() const { return static_cast<std::size_t>(n_) * n_ * n_; }

  /// Velocity at every grid point, layout [point][component].
  std::vector<Vec3> velocity(const FourierState& u) const;

  /// Velocity gradient, layout [point][component i][derivative j] = d_j u_i.
  std::vector<std::array<Vec3, 3>> gradient(const FourierState& u) const;

  /// Grid average of u . v (the L^2 inner product under the normalized measure).
  double inner_product(const FourierState& u, const FourierState& v) const;

  /// Projects a sampled vector field on the basis: discrete Fourier transform
  /// at each basis wavevector, Leray projection P(k) = I - k k^T / |k|^2, then
  /// the real mode coefficient.
  FourierState project(const std::vector<Vec3>& field) const;

  /// Pseudospectral evaluation of pi_N Pi (u . grad) v.
  FourierState bilinear(const FourierState& u, const FourierState& v) const;

 private:
  BasisPtr basis_;
  int n_;
  // Per mode, cos/sin of k.x at every grid point (already times sqrt(2)).
  std::vector<std::vector<double>> mode_values_;
  std::vector<std::vector<double>> mode_derivs_;
};

}  // namespace snslab
