#include "snslab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <tuple>

namespace snslab {
namespace {

int norm2(const Wavevector& k) { return k[0] * k[0] + k[1] * k[1] + k[2] * k[2]; }

bool is_representative(const Wavevector& k) {
  for (int c : k) {
    if (c != 0) return c > 0;
  }
  return false;
}

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

Vec3 normalized(Vec3 v) {
  const double n = std::sqrt(dot(v, v));
  for (double& c : v) c /= n;
  return v;
}

// Polarizations by Gram-Schmidt against the coordinate axis on which k has
// the smallest magnitude (lowest index on ties); never collinear with k.
std::array<Vec3, 2> polarizations(const Wavevector& k) {
  const Vec3 kh = normalized({double(k[0]), double(k[1]), double(k[2])});
  int axis = 0;
  for (int i = 1; i < 3; ++i) {
    if (std::abs(k[i]) < std::abs(k[axis])) axis = i;
  }
  Vec3 aux{0.0, 0.0, 0.0};
  aux[axis] = 1.0;
  const double p = dot(aux, kh);
  Vec3 a1{aux[0] - p * kh[0], aux[1] - p * kh[1], aux[2] - p * kh[2]};
  a1 = normalized(a1);
  return {a1, normalized(cross(kh, a1))};
}

// Coefficients of a real trig function on exp(+i theta) and exp(-i theta).
// `derivative` replaces cos by -sin and sin by cos.
std::array<std::complex<double>, 2> trig_coefficients(Parity parity, bool derivative) {
  using C = std::complex<double>;
  const C half{0.5, 0.0};
  const C half_over_i{0.0, -0.5};  // 1 / (2i)
  if (!derivative) {
    if (parity == Parity::Cos) return {half, half};
    return {half_over_i, -half_over_i};
  }
  if (parity == Parity::Cos) return {-half_over_i, half_over_i};  // -sin
  return {half, half};                                          // cos
}

// Torus average of f1(k1.x) f2(k2.x) f3(k3.x).
double triple_average(const Wavevector& k1, const std::array<std::complex<double>, 2>& c1,
                      const Wavevector& k2, const std::array<std::complex<double>, 2>& c2,
                      const Wavevector& k3, const std::array<std::complex<double>, 2>& c3) {
  std::complex<double> total{0.0, 0.0};
  for (int s1 = 0; s1 < 2; ++s1) {
    for (int s2 = 0; s2 < 2; ++s2) {
      for (int s3 = 0; s3 < 2; ++s3) {
        const int g1 = s1 == 0 ? 1 : -1;
        const int g2 = s2 == 0 ? 1 : -1;
        const int g3 = s3 == 0 ? 1 : -1;
        bool zero = true;
        for (int a = 0; a < 3; ++a) {
          if (g1 * k1[a] + g2 * k2[a] + g3 * k3[a] != 0) {
            zero = false;
            break;
          }
        }
        if (zero) total += c1[s1] * c2[s2] * c3[s3];
      }
    }
  }
  return total.real();
}

bool wave_sum_possible(const Wavevector& a, const Wavevector& b, const Wavevector& c) {
  for (int g2 : {1, -1}) {
    for (int g3 : {1, -1}) {
      if (a[0] + g2 * b[0] + g3 * c[0] == 0 && a[1] + g2 * b[1] + g3 * c[1] == 0 &&
          a[2] + g2 * b[2] + g3 * c[2] == 0)
        return true;
    }
  }
  return false;
}

std::vector<Triad> build_triads(const std::vector<Mode>& modes) {
  std::vector<Triad> triads;
  const std::size_t n = modes.size();
  constexpr double kScale = 2.0 * 1.4142135623730951;  // 2 sqrt(2)
  for (std::size_t m = 0; m < n; ++m) {
    const Mode& em = modes[m];
    for (std::size_t i = 0; i < n; ++i) {
      const Mode& ei = modes[i];
      for (std::size_t j = 0; j < n; ++j) {
        const Mode& ej = modes[j];
        if (!wave_sum_possible(em.k, ei.k, ej.k)) continue;
        const Vec3 kj{double(ej.k[0]), double(ej.k[1]), double(ej.k[2])};
        const double geometric = dot(em.direction, ej.direction) * dot(ei.direction, kj);
        if (geometric == 0.0) continue;
        const double avg = triple_average(em.k, trig_coefficients(em.parity, false), ei.k,
                                          trig_coefficients(ei.parity, false), ej.k,
                                          trig_coefficients(ej.parity, true));
        const double coef = kScale * geometric * avg;
        if (std::abs(coef) < 1e-15) continue;
        triads.push_back({static_cast<std::uint32_t>(m), static_cast<std::uint32_t>(i),
                          static_cast<std::uint32_t>(j), coef});
      }
    }
  }
  return triads;
}

void require_same(const FourierState& u, const FourierState& v) {
  if (!u.same_basis(v)) throw BasisMismatch();
}

}  // namespace

BasisPtr SpectralBasis::build(int cutoff) {
  if (cutoff < 1) throw InvalidArgument("basis cutoff must be >= 1");
  const int r = static_cast<int>(std::floor(std::sqrt(double(cutoff))));
  std::vector<Wavevector> ks;
  for (int a = -r; a <= r; ++a) {
    for (int b = -r; b <= r; ++b) {
      for (int c = -r; c <= r; ++c) {
        const Wavevector k{a, b, c};
        if (norm2(k) <= cutoff && is_representative(k)) ks.push_back(k);
      }
    }
  }
  std::sort(ks.begin(), ks.end(), [](const Wavevector& x, const Wavevector& y) {
    return std::make_tuple(norm2(x), x) < std::make_tuple(norm2(y), y);
  });

  std::shared_ptr<SpectralBasis> basis(new SpectralBasis());
  basis->cutoff_ = cutoff;
  for (const Wavevector& k : ks) {
    const auto pol = polarizations(k);
    for (int p = 0; p < 2; ++p) {
      for (Parity parity : {Parity::Cos, Parity::Sin}) {
        basis->modes_.push_back({k, p + 1, parity, pol[p], double(norm2(k))});
      }
    }
  }
  for (const Mode& m : basis->modes_) basis->eigenvalues_.push_back(m.eigenvalue);
  basis->triads_ = build_triads(basis->modes_);
  return basis;
}

BasisPtr SpectralBasis::prefix(std::size_t n_modes) const {
  if (n_modes == 0 || n_modes > modes_.size()) {
    throw InvalidArgument("Galerkin level must lie in [1, " + std::to_string(modes_.size()) +
                          "], got " + std::to_string(n_modes));
  }
  std::shared_ptr<SpectralBasis> basis(new SpectralBasis());
  basis->cutoff_ = cutoff_;
  basis->modes_.assign(modes_.begin(), modes_.begin() + n_modes);
  basis->eigenvalues_.assign(eigenvalues_.begin(), eigenvalues_.begin() + n_modes);
  for (const Triad& t : triads_) {
    if (t.out < n_modes && t.left < n_modes && t.right < n_modes) basis->triads_.push_back(t);
  }
  return basis;
}

int SpectralBasis::max_component() const {
  int m = 0;
  for (const Mode& mode : modes_) {
    for (int c : mode.k) m = std::max(m, std::abs(c));
  }
  return m;
}

std::size_t SpectralBasis::find(const Wavevector& k, int polarization, Parity parity) const {
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    const Mode& m = modes_[i];
    if (m.k == k && m.polarization == polarization && m.parity == parity) return i;
  }
  return modes_.size();
}

std::string SpectralBasis::describe() const {
  std::ostringstream os;
  os << "# index kx ky kz polarization ax ay az parity lambda\n";
  char line[256];
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    const Mode& m = modes_[i];
    std::snprintf(line, sizeof line, "%zu %d %d %d %d %.17g %.17g %.17g %s %.17g\n", i, m.k[0],
                  m.k[1], m.k[2], m.polarization, m.direction[0], m.direction[1],
                  m.direction[2], m.parity == Parity::Cos ? "cos" : "sin", m.eigenvalue);
    os << line;
  }
  return os.str();
}

BasisPtr build_basis(int cutoff) { return SpectralBasis::build(cutoff); }

BasisPtr galerkin_basis(int cutoff, std::size_t n_modes) {
  auto full = build_basis(cutoff);
  if (n_modes == 0 || n_modes == full->size()) return full;
  return full->prefix(n_modes);
}

// FourierState

FourierState::FourierState(BasisPtr basis) : basis_(std::move(basis)) {
  if (!basis_) throw InvalidArgument("FourierState needs a basis");
  coeffs_.assign(basis_->size(), 0.0);
}

FourierState::FourierState(BasisPtr basis, std::vector<double> coeffs)
    : basis_(std::move(basis)), coeffs_(std::move(coeffs)) {
  if (!basis_) throw InvalidArgument("FourierState needs a basis");
  if (coeffs_.size() != basis_->size()) {
    throw InvalidArgument("coefficient count " + std::to_string(coeffs_.size()) +
                          " does not match basis size " + std::to_string(basis_->size()));
  }
  if (!all_finite()) throw InvalidArgument("FourierState coefficients must be finite");
}

FourierState FourierState::unit(BasisPtr basis, std::size_t mode, double value) {
  FourierState u(std::move(basis));
  if (mode >= u.size()) throw InvalidArgument("mode index out of range");
  u.coeffs_[mode] = value;
  return u;
}

bool FourierState::all_finite() const {
  return std::all_of(coeffs_.begin(), coeffs_.end(), [](double c) { return std::isfinite(c); });
}

bool FourierState::same_basis(const FourierState& other) const {
  if (basis_ == other.basis_) return true;
  if (!basis_ || !other.basis_) return false;
  return basis_->cutoff() == other.basis_->cutoff() && basis_->size() == other.basis_->size();
}

FourierState& FourierState::operator+=(const FourierState& other) {
  require_same(*this, other);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += other.coeffs_[i];
  return *this;
}

FourierState& FourierState::operator-=(const FourierState& other) {
  require_same(*this, other);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= other.coeffs_[i];
  return *this;
}

FourierState& FourierState::operator*=(double s) {
  for (double& c : coeffs_) c *= s;
  return *this;
}

double inner_product(const FourierState& u, const FourierState& v) {
  require_same(u, v);
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s;
}

double sobolev_norm(const FourierState& u, double weight_exponent) {
  const auto lambda = u.basis()->eigenvalues();
  double s = 0.0;
  if (weight_exponent == 0.0) {
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * u[i];
  } else {
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double w = std::pow(lambda[i], weight_exponent);
      s += w * w * u[i] * u[i];
    }
  }
  return std::sqrt(s);
}

FourierState stokes_apply(const FourierState& u, double exponent) {
  FourierState out = u;
  if (exponent == 0.0) return out;
  const auto lambda = u.basis()->eigenvalues();
  for (std::size_t i = 0; i < u.size(); ++i) out[i] *= std::pow(lambda[i], exponent);
  return out;
}

FourierState semigroup_apply(const FourierState& u, double t, double viscosity) {
  if (!(t >= 0.0)) throw InvalidArgument("semigroup time must be nonnegative");
  FourierState out = u;
  if (t == 0.0) return out;
  const auto lambda = u.basis()->eigenvalues();
  for (std::size_t i = 0; i < u.size(); ++i) out[i] *= std::exp(-viscosity * lambda[i] * t);
  return out;
}

FourierState bilinear(const FourierState& u, const FourierState& v) {
  require_same(u, v);
  FourierState out(u.basis());
  auto o = out.coeffs();
  const auto a = u.coeffs();
  const auto b = v.coeffs();
  for (const Triad& t : u.basis()->triads()) o[t.out] += t.coef * a[t.left] * b[t.right];
  return out;
}

FourierState bilinear_adjoint_left(const FourierState& w, const FourierState& v) {
  require_same(w, v);
  FourierState out(w.basis());
  auto o = out.coeffs();
  const auto a = w.coeffs();
  const auto b = v.coeffs();
  for (const Triad& t : w.basis()->triads()) o[t.left] += t.coef * a[t.out] * b[t.right];
  return out;
}

FourierState bilinear_adjoint_right(const FourierState& w, const FourierState& u) {
  require_same(w, u);
  FourierState out(w.basis());
  auto o = out.coeffs();
  const auto a = w.coeffs();
  const auto b = u.coeffs();
  for (const Triad& t : w.basis()->triads()) o[t.right] += t.coef * a[t.out] * b[t.left];
  return out;
}

// chi(s) = g(2 - s) / (g(2 - s) + g(s - 1)) with g(x) = exp(-1/x) for x > 0.
double CutoffProfile::value(double s) const {
  if (s <= 1.0) return 1.0;
  if (s >= 2.0) return 0.0;
  const double a = std::exp(-1.0 / (2.0 - s));
  const double b = std::exp(-1.0 / (s - 1.0));
  return a / (a + b);
}

double CutoffProfile::derivative(double s) const {
  if (s <= 1.0 || s >= 2.0) return 0.0;
  const double x = 2.0 - s;
  const double y = s - 1.0;
  const double a = std::exp(-1.0 / x);
  const double b = std::exp(-1.0 / y);
  const double da = -a / (x * x);  // d/ds g(2 - s)
  const double db = b / (y * y);   // d/ds g(s - 1)
  const double d = a + b;
  return (da * d - a * (da + db)) / (d * d);
}

FourierState truncated_bilinear(const FourierState& u, double R, const CutoffProfile& chi) {
  if (!(R > 0.0)) throw InvalidArgument("truncation level R must be positive");
  const double au = sobolev_norm(u, 1.0);
  const double c = chi.value(au * au / R);
  if (c == 0.0) return FourierState(u.basis());
  FourierState b = bilinear(u, u);
  if (c != 1.0) b *= c;
  return b;
}

FourierState truncated_bilinear_derivative(const FourierState& u, const FourierState& direction,
                                           double R, const CutoffProfile& chi) {
  require_same(u, direction);
  if (!(R > 0.0)) throw InvalidArgument("truncation level R must be positive");
  const double au = sobolev_norm(u, 1.0);
  const double s = au * au / R;
  const double c = chi.value(s);
  const double dc = chi.derivative(s) / R;
  FourierState out(u.basis());
  if (c != 0.0) {
    out = bilinear(direction, u);
    out += bilinear(u, direction);
    out *= c;
  }
  if (dc != 0.0) {
    const double a_dot =
        inner_product(stokes_apply(u, 1.0), stokes_apply(direction, 1.0));
    FourierState b = bilinear(u, u);
    b *= 2.0 * dc * a_dot;
    out += b;
  }
  return out;
}

FourierState truncated_bilinear_derivative_adjoint(const FourierState& u, const FourierState& w,
                                                   double R, const CutoffProfile& chi) {
  require_same(u, w);
  if (!(R > 0.0)) throw InvalidArgument("truncation level R must be positive");
  const double au = sobolev_norm(u, 1.0);
  const double s = au * au / R;
  const double c = chi.value(s);
  const double dc = chi.derivative(s) / R;
  FourierState out(u.basis());
  if (c != 0.0) {
    out = bilinear_adjoint_left(w, u);
    out += bilinear_adjoint_right(w, u);
    out *= c;
  }
  if (dc != 0.0) {
    FourierState a2u = stokes_apply(u, 2.0);
    a2u *= 2.0 * dc * inner_product(bilinear(u, u), w);
    out += a2u;
  }
  return out;
}

}  // namespace snslab
