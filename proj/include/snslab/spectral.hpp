#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "snslab/error.hpp"

namespace snslab {

using Wavevector = std::array<int, 3>;
using Vec3 = std::array<double, 3>;

enum class Parity : std::uint8_t { Cos = 0, Sin = 1 };

/// One real divergence-free Fourier mode sqrt(2) * a * cos(k.x) or
/// sqrt(2) * a * sin(k.x), normalized on the torus [0, 2pi]^3 with the
/// measure scaled by (2pi)^-3.
struct Mode {
  Wavevector k;
  int polarization;  // 1 or 2
  Parity parity;
  Vec3 direction;    // unit, orthogonal to k
  double eigenvalue; // |k|^2
};

/// Nonzero entry of the Galerkin triad tensor
/// coef = <e_out, (e_left . grad) e_right>.
struct Triad {
  std::uint32_t out;
  std::uint32_t left;
  std::uint32_t right;
  double coef;
};

class SpectralBasis;
using BasisPtr = std::shared_ptr<const SpectralBasis>;

/// Eigenmodes of the Stokes operator on the 3-torus with |k|^2 <= cutoff.
///
/// Modes are ordered by (eigenvalue, k lexicographic, polarization, parity).
/// Only one representative of each pair {k, -k} is kept (first nonzero
/// component positive); the cos/sin parities carry the real degrees of
/// freedom. A prefix of the ordering is again a valid basis (the Galerkin
/// space H_N).
class SpectralBasis {
 public:
  static BasisPtr build(int cutoff);

  /// First n_modes modes of this basis, with the triad tensor restricted.
  BasisPtr prefix(std::size_t n_modes) const;

  int cutoff() const { return cutoff_; }
  std::size_t size() const { return modes_.size(); }
  const std::vector<Mode>& modes() const { return modes_; }
  const Mode& mode(std::size_t i) const { return modes_.at(i); }
  std::span<const double> eigenvalues() const { return eigenvalues_; }
  const std::vector<Triad>& triads() const { return triads_; }

  /// Largest |k_i| over all modes and axes.
  int max_component() const;

  /// Mode index of (k, polarization, parity), or size() if absent.
  std::size_t find(const Wavevector& k, int polarization, Parity parity) const;

  /// Text table (index, k, polarization vector, parity, lambda).
  std::string describe() const;

 private:
  SpectralBasis() = default;

  int cutoff_ = 0;
  std::vector<Mode> modes_;
  std::vector<double> eigenvalues_;
  std::vector<Triad> triads_;
};

/// Builds the basis of all divergence-free real modes with |k|^2 <= cutoff.
BasisPtr build_basis(int cutoff);

/// Basis for Galerkin level n_modes taken from the shell cutoff containing it.
BasisPtr galerkin_basis(int cutoff, std::size_t n_modes);

/// Velocity field as real coefficients <u, e_k> over a SpectralBasis.
class FourierState {
 public:
  FourierState() = default;
  explicit FourierState(BasisPtr basis);
  FourierState(BasisPtr basis, std::vector<double> coeffs);

  static FourierState unit(BasisPtr basis, std::size_t mode, double value = 1.0);

  const BasisPtr& basis() const { return basis_; }
  std::size_t size() const { return coeffs_.size(); }
  std::span<const double> coeffs() const { return coeffs_; }
  std::span<double> coeffs() { return coeffs_; }
  double operator[](std::size_t i) const { return coeffs_[i]; }
  double& operator[](std::size_t i) { return coeffs_[i]; }

  bool all_finite() const;
  bool same_basis(const FourierState& other) const;

  FourierState& operator+=(const FourierState& other);
  FourierState& operator-=(const FourierState& other);
  FourierState& operator*=(double s);

  friend FourierState operator+(FourierState a, const FourierState& b) { return a += b; }
  friend FourierState operator-(FourierState a, const FourierState& b) { return a -= b; }
  friend FourierState operator*(double s, FourierState a) { return a *= s; }
  friend bool operator==(const FourierState& a, const FourierState& b) {
    return a.coeffs_ == b.coeffs_;
  }

 private:
  BasisPtr basis_;
  std::vector<double> coeffs_;
};

double inner_product(const FourierState& u, const FourierState& v);

/// (sum_k lambda_k^(2 * weight_exponent) u_k^2)^(1/2): H for 0, V for 1/2,
/// D(A) for 1.
double sobolev_norm(const FourierState& u, double weight_exponent);

/// Coefficient-wise multiplication by lambda_k^exponent (A^exponent).
FourierState stokes_apply(const FourierState& u, double exponent);

/// Coefficient-wise multiplication by exp(-viscosity * lambda_k * t).
FourierState semigroup_apply(const FourierState& u, double t, double viscosity);

/// pi_N B(u, v): Leray-projected advection (u . grad) v restricted to the basis.
FourierState bilinear(const FourierState& u, const FourierState& v);
inline FourierState bilinear(const FourierState& u) { return bilinear(u, u); }

/// Gradient in the first slot of w . B(., v), i.e. the vector g with
/// <g, theta> = <w, B(theta, v)> for every theta.
FourierState bilinear_adjoint_left(const FourierState& w, const FourierState& v);

/// Gradient in the second slot: <g, theta> = <w, B(u, theta)>.
FourierState bilinear_adjoint_right(const FourierState& w, const FourierState& u);

/// Smooth cutoff: 1 on (-inf, 1], 0 on [2, inf), C-infinity in between.
struct CutoffProfile {
  double value(double s) const;
  double derivative(double s) const;
};

/// chi(||A u||^2 / R) * B(u, u).
FourierState truncated_bilinear(const FourierState& u, double R,
                                const CutoffProfile& chi = {});

/// Gateaux derivative of the truncated bilinear term along `direction`:
/// chi_R (B(theta,u) + B(u,theta)) + 2 chi_R' <Au, A theta> B(u,u).
FourierState truncated_bilinear_derivative(const FourierState& u,
                                           const FourierState& direction, double R,
                                           const CutoffProfile& chi = {});

/// Transpose of truncated_bilinear_derivative(u, ., R) applied to w.
FourierState truncated_bilinear_derivative_adjoint(const FourierState& u,
                                                   const FourierState& w, double R,
                                                   const CutoffProfile& chi = {});

}  // namespace snslab
