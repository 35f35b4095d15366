#include "snslab/density.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "snslab/stats.hpp"

namespace snslab {

namespace {

void check_dim(std::size_t d) {
  if (d < 1 || d > 3) throw InvalidArgument("grid dimension must be 1, 2 or 3");
}

std::vector<double> binomial_signs(int n) {
  std::vector<double> c(n + 1);
  double b = 1.0;
  for (int j = 0; j <= n; ++j) {
    c[j] = ((n - j) % 2 == 0 ? 1.0 : -1.0) * b;
    b = b * double(n - j) / double(j + 1);
  }
  return c;
}

std::string format_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

GridGeometry::GridGeometry(std::vector<double> lo, std::vector<double> hi,
                           std::vector<std::size_t> counts_)
    : origin(std::move(lo)), counts(std::move(counts_)) {
  check_dim(counts.size());
  if (origin.size() != counts.size() || hi.size() != counts.size()) {
    throw InvalidArgument("box corners and cell counts must have the same dimension");
  }
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] == 0) throw InvalidArgument("grid needs at least one cell per axis");
    if (!std::isfinite(origin[i]) || !std::isfinite(hi[i]) || !(hi[i] > origin[i])) {
      throw InvalidArgument("degenerate box on axis " + std::to_string(i));
    }
    spacing.push_back((hi[i] - origin[i]) / double(counts[i]));
  }
}

std::size_t GridGeometry::size() const {
  std::size_t n = 1;
  for (std::size_t c : counts) n *= c;
  return counts.empty() ? 0 : n;
}

double GridGeometry::cell_volume() const {
  double v = 1.0;
  for (double s : spacing) v *= s;
  return v;
}

std::vector<double> GridGeometry::upper() const {
  std::vector<double> u(dim());
  for (std::size_t i = 0; i < dim(); ++i) u[i] = origin[i] + spacing[i] * double(counts[i]);
  return u;
}

std::vector<double> GridGeometry::center(std::size_t flat_index) const {
  const auto idx = unflatten(flat_index);
  std::vector<double> c(dim());
  for (std::size_t i = 0; i < dim(); ++i) c[i] = origin[i] + (double(idx[i]) + 0.5) * spacing[i];
  return c;
}

std::size_t GridGeometry::flat(std::span<const std::size_t> index) const {
  std::size_t f = 0;
  for (std::size_t i = 0; i < dim(); ++i) f = f * counts[i] + index[i];
  return f;
}

std::vector<std::size_t> GridGeometry::unflatten(std::size_t f) const {
  std::vector<std::size_t> idx(dim());
  for (std::size_t i = dim(); i-- > 0;) {
    idx[i] = f % counts[i];
    f /= counts[i];
  }
  return idx;
}

GridGeometry GridGeometry::refined(std::size_t factor) const {
  if (factor == 0) throw InvalidArgument("refinement factor must be positive");
  std::vector<std::size_t> c(counts);
  for (auto& v : c) v *= factor;
  return GridGeometry(origin, upper(), c);
}

GridFunction::GridFunction(GridGeometry g, std::vector<double> v)
    : grid(std::move(g)), values(std::move(v)) {
  if (values.size() != grid.size()) throw InvalidArgument("grid values do not match cell count");
}

GridFunction GridFunction::sample(GridGeometry g,
                                  const std::function<double(std::span<const double>)>& fn) {
  GridFunction f(std::move(g));
  for (std::size_t c = 0; c < f.values.size(); ++c) f.values[c] = fn(f.grid.center(c));
  return f;
}

double GridFunction::lp_norm(double p) const {
  if (!(p >= 1.0)) throw InvalidArgument("L^p norm needs p >= 1");
  double s = 0.0;
  if (std::isinf(p)) {
    for (double v : values) s = std::max(s, std::abs(v));
    return s;
  }
  for (double v : values) s += std::pow(std::abs(v), p);
  return std::pow(s * grid.cell_volume(), 1.0 / p);
}

double GridFunction::integral() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s * grid.cell_volume();
}

double DifferenceSpec::magnitude() const {
  double s = 0.0;
  for (double v : h) s += v * v;
  return std::sqrt(s);
}

std::vector<long> aligned_steps(const GridGeometry& grid, std::span<const double> h) {
  if (h.size() != grid.dim()) throw InvalidArgument("step dimension does not match the grid");
  std::vector<long> steps(h.size());
  bool nonzero = false;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double r = h[i] / grid.spacing[i];
    const double n = std::round(r);
    if (std::abs(r - n) > 1e-9 * std::max(1.0, std::abs(r))) {
      throw InvalidArgument("step component " + std::to_string(i) +
                            " is not a multiple of the grid spacing");
    }
    steps[i] = static_cast<long>(n);
    nonzero = nonzero || steps[i] != 0;
  }
  if (!nonzero) throw InvalidArgument("difference step h must be nonzero");
  return steps;
}

GridFunction difference_apply(const GridFunction& f, std::span<const long> steps, int n) {
  if (n < 1) throw InvalidArgument("difference order must be >= 1");
  const std::size_t d = f.grid.dim();
  if (steps.size() != d) throw InvalidArgument("step dimension does not match the grid");
  if (std::all_of(steps.begin(), steps.end(), [](long s) { return s == 0; })) {
    throw InvalidArgument("difference step h must be nonzero");
  }
  std::vector<double> lo(d), hi(d);
  std::vector<std::size_t> counts(d), offset(d);
  for (std::size_t i = 0; i < d; ++i) {
    const long reach = n * std::abs(steps[i]);
    if (reach >= static_cast<long>(f.grid.counts[i])) {
      throw InvalidArgument("difference step leaves no cells on axis " + std::to_string(i));
    }
    offset[i] = steps[i] < 0 ? static_cast<std::size_t>(reach) : 0;
    counts[i] = f.grid.counts[i] - static_cast<std::size_t>(reach);
    lo[i] = f.grid.origin[i] + double(offset[i]) * f.grid.spacing[i];
    hi[i] = lo[i] + double(counts[i]) * f.grid.spacing[i];
  }
  GridFunction out(GridGeometry(lo, hi, counts));
  out.grid.spacing = f.grid.spacing;
  const auto coef = binomial_signs(n);
  std::vector<std::size_t> idx(d);
  for (std::size_t c = 0; c < out.values.size(); ++c) {
    const auto o = out.grid.unflatten(c);
    double acc = 0.0;
    for (int j = 0; j <= n; ++j) {
      for (std::size_t i = 0; i < d; ++i) {
        idx[i] = static_cast<std::size_t>(static_cast<long>(o[i] + offset[i]) + j * steps[i]);
      }
      acc += coef[j] * f.values[f.grid.flat(idx)];
    }
    out.values[c] = acc;
  }
  return out;
}

GridFunction difference_apply(const GridFunction& f, const DifferenceSpec& spec) {
  const double m = spec.magnitude();
  if (m == 0.0) throw InvalidArgument("difference step h must be nonzero");
  if (m > 1.0 + 1e-12) throw InvalidArgument("difference step must satisfy |h| <= 1");
  return difference_apply(f, aligned_steps(f.grid, spec.h), spec.n);
}

std::string to_string(DensityEstimator e) {
  return e == DensityEstimator::Histogram ? "histogram" : "product_kernel";
}

std::pair<std::vector<double>, std::vector<double>> sample_box(std::span<const double> samples,
                                                               std::size_t d, double width) {
  check_dim(d);
  if (samples.empty() || samples.size() % d != 0) throw InvalidArgument("sample array is not n x d");
  const std::size_t n = samples.size() / d;
  std::vector<double> lo(d), hi(d);
  for (std::size_t i = 0; i < d; ++i) {
    std::vector<double> col(n);
    for (std::size_t s = 0; s < n; ++s) col[s] = samples[s * d + i];
    const auto e = stats::mean_estimate(col);
    const double sd = std::sqrt(e.variance);
    if (!(sd > 1e-12 * (1.0 + std::abs(e.mean)))) {
      throw InvalidArgument("degenerate box: samples have no spread on axis " + std::to_string(i));
    }
    lo[i] = e.mean - width * sd;
    hi[i] = e.mean + width * sd;
  }
  return {lo, hi};
}

EmpiricalDensity estimate_density(std::span<const double> samples, const GridGeometry& grid,
                                  const DensityOptions& options) {
  const std::size_t d = grid.dim();
  check_dim(d);
  if (samples.empty()) throw InvalidArgument("density estimation needs samples");
  if (samples.size() % d != 0) throw InvalidArgument("sample array is not n x d");
  const std::size_t n = samples.size() / d;
  if (n < options.min_samples) {
    throw InvalidArgument("density estimation needs at least " +
                          std::to_string(options.min_samples) + " samples, got " +
                          std::to_string(n));
  }
  for (double s : grid.spacing) {
    if (!(s > 0.0)) throw InvalidArgument("degenerate box");
  }

  EmpiricalDensity out;
  out.estimator = options.estimator;
  out.sample_count = n;
  out.density = GridFunction(grid);
  std::vector<double> mass(grid.size(), 0.0);
  double in_box = 0.0;

  if (options.estimator == DensityEstimator::Histogram) {
    std::vector<std::size_t> idx(d);
    for (std::size_t s = 0; s < n; ++s) {
      bool inside = true;
      for (std::size_t i = 0; i < d && inside; ++i) {
        const double r = (samples[s * d + i] - grid.origin[i]) / grid.spacing[i];
        if (!(r >= 0.0) || r >= double(grid.counts[i])) {
          inside = false;
        } else {
          idx[i] = std::min(static_cast<std::size_t>(r), grid.counts[i] - 1);
        }
      }
      if (!inside) continue;
      mass[grid.flat(idx)] += 1.0;
      in_box += 1.0;
    }
  } else {
    std::vector<double> bw = options.bandwidth;
    if (bw.empty()) {
      for (std::size_t i = 0; i < d; ++i) {
        std::vector<double> col(n);
        for (std::size_t s = 0; s < n; ++s) col[s] = samples[s * d + i];
        const double sd = std::sqrt(stats::mean_estimate(col).variance);
        bw.push_back(sd * std::pow(double(n), -1.0 / double(d + 4)));
      }
    }
    if (bw.size() != d) throw InvalidArgument("one bandwidth per axis is required");
    out.bandwidth = bw;
    // Per axis, the kernel mass of each cell is a CDF difference.
    std::vector<std::vector<double>> axis_mass(d);
    std::vector<std::size_t> first(d), last(d);
    for (std::size_t s = 0; s < n; ++s) {
      double total = 1.0;
      for (std::size_t i = 0; i < d; ++i) {
        const double x = samples[s * d + i];
        const double o = grid.origin[i], h = grid.spacing[i];
        const auto N = static_cast<long>(grid.counts[i]);
        auto& m = axis_mass[i];
        m.assign(grid.counts[i], 0.0);
        if (bw[i] > 0.0) {
          const long a = std::max(0L, static_cast<long>(std::floor((x - 9.0 * bw[i] - o) / h)));
          const long b = std::min(N - 1, static_cast<long>(std::floor((x + 9.0 * bw[i] - o) / h)));
          first[i] = static_cast<std::size_t>(std::max(a, 0L));
          last[i] = static_cast<std::size_t>(std::max(b, -1L) + 1);
          double axis_total = 0.0;
          for (long c = a; c <= b; ++c) {
            const double lo = stats::normal_cdf((o + double(c) * h - x) / bw[i]);
            const double hi = stats::normal_cdf((o + double(c + 1) * h - x) / bw[i]);
            m[c] = hi - lo;
            axis_total += m[c];
          }
          total *= axis_total;
        } else {
          const double r = (x - o) / h;
          if (r >= 0.0 && r < double(N)) {
            const auto c = std::min(static_cast<std::size_t>(r), grid.counts[i] - 1);
            m[c] = 1.0;
            first[i] = c;
            last[i] = c + 1;
          } else {
            first[i] = last[i] = 0;
            total = 0.0;
          }
        }
        if (first[i] >= last[i]) total = 0.0;
      }
      if (total == 0.0) continue;
      in_box += total;
      std::vector<std::size_t> idx(first.begin(), first.end());
      for (;;) {
        double w = 1.0;
        for (std::size_t i = 0; i < d; ++i) w *= axis_mass[i][idx[i]];
        mass[grid.flat(idx)] += w;
        std::size_t ax = d;
        while (ax-- > 0) {
          if (++idx[ax] < last[ax]) break;
          idx[ax] = first[ax];
        }
        if (ax == static_cast<std::size_t>(-1)) break;
      }
    }
  }

  const double vol = grid.cell_volume();
  double max_mass = 0.0;
  for (std::size_t c = 0; c < mass.size(); ++c) {
    out.density.values[c] = mass[c] / (double(n) * vol);
    max_mass = std::max(max_mass, mass[c]);
  }
  out.total_mass = in_box / double(n);
  out.out_of_box_fraction = 1.0 - out.total_mass;
  out.max_cell_mass = max_mass / double(n);
  out.atom_like = in_box > 0.0 && max_mass >= 0.5 * in_box;
  return out;
}

double l1_distance(const GridFunction& f, const GridFunction& g) {
  if (f.grid.counts != g.grid.counts || f.grid.origin != g.grid.origin ||
      f.grid.spacing != g.grid.spacing) {
    throw InvalidArgument("L^1 distance needs functions on the same grid");
  }
  double s = 0.0;
  for (std::size_t c = 0; c < f.values.size(); ++c) s += std::abs(f.values[c] - g.values[c]);
  return s * f.grid.cell_volume();
}

double l1_distance(const GridFunction& f, const std::function<double(std::span<const double>)>& g,
                   int subdivisions) {
  if (subdivisions < 1) throw InvalidArgument("subdivisions must be >= 1");
  const std::size_t d = f.grid.dim();
  std::size_t sub_cells = 1;
  for (std::size_t i = 0; i < d; ++i) sub_cells *= static_cast<std::size_t>(subdivisions);
  std::vector<double> x(d);
  double total = 0.0;
  for (std::size_t c = 0; c < f.values.size(); ++c) {
    const auto idx = f.grid.unflatten(c);
    double cell = 0.0;
    for (std::size_t q = 0; q < sub_cells; ++q) {
      std::size_t r = q;
      for (std::size_t i = 0; i < d; ++i) {
        const auto k = r % static_cast<std::size_t>(subdivisions);
        r /= static_cast<std::size_t>(subdivisions);
        x[i] = f.grid.origin[i] +
               (double(idx[i]) + (double(k) + 0.5) / double(subdivisions)) * f.grid.spacing[i];
      }
      cell += std::abs(f.values[c] - g(x));
    }
    total += cell / double(sub_cells);
  }
  return total * f.grid.cell_volume();
}

SeminormEstimate besov_seminorm_estimate(const GridFunction& f, double s, int n,
                                         const std::vector<std::vector<double>>& h_sweep) {
  if (n < 1) throw InvalidArgument("difference order must be >= 1");
  if (!(s < double(n))) throw InvalidArgument("Besov smoothness s must be below the order n");
  if (!(s >= 0.0)) throw InvalidArgument("Besov smoothness s must be nonnegative");
  if (h_sweep.empty()) throw InvalidArgument("empty h sweep");
  SeminormEstimate est;
  est.s = s;
  est.n = n;
  est.l1_norm = f.lp_norm(1.0);
  for (const auto& h : h_sweep) {
    DifferenceSpec spec{n, h};
    const GridFunction diff = difference_apply(f, spec);
    SeminormTerm t;
    t.h_magnitude = spec.magnitude();
    t.difference_l1 = diff.lp_norm(1.0);
    t.ratio = t.difference_l1 / std::pow(t.h_magnitude, s);
    est.sup_ratio = std::max(est.sup_ratio, t.ratio);
    est.terms.push_back(t);
  }
  est.value = est.l1_norm + est.sup_ratio;
  return est;
}

std::vector<std::vector<double>> dyadic_aligned_sweep(const GridGeometry& grid,
                                                      std::span<const double> direction,
                                                      int levels) {
  if (direction.size() != grid.dim()) throw InvalidArgument("direction dimension mismatch");
  double norm = 0.0;
  for (double v : direction) norm += v * v;
  norm = std::sqrt(norm);
  if (norm == 0.0) throw InvalidArgument("direction must be nonzero");
  std::vector<std::vector<double>> sweep;
  for (int l = 1; l <= levels; ++l) {
    const double m = std::ldexp(1.0, -l);
    std::vector<double> h(grid.dim());
    bool nonzero = false;
    for (std::size_t i = 0; i < grid.dim(); ++i) {
      const double steps = std::round(m * direction[i] / norm / grid.spacing[i]);
      h[i] = steps * grid.spacing[i];
      nonzero = nonzero || steps != 0.0;
    }
    if (!nonzero) {
      throw InvalidArgument("|h| = 2^-" + std::to_string(l) + " is below the grid spacing");
    }
    sweep.push_back(h);
  }
  return sweep;
}

double sine_holder_constant(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidArgument("Hoelder exponent must lie in (0, 1]");
  // 2 sin(t/2) / t^alpha is unimodal on (0, pi]; beyond pi the numerator
  // is at most 2 and the denominator grows. Golden-section search.
  auto g = [alpha](double t) { return 2.0 * std::sin(0.5 * t) / std::pow(t, alpha); };
  if (alpha == 1.0) return 1.0;
  double a = 1e-9, b = std::numbers::pi;
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - r * (b - a), d = a + r * (b - a);
  for (int it = 0; it < 200; ++it) {
    if (g(c) > g(d)) {
      b = d;
    } else {
      a = c;
    }
    c = b - r * (b - a);
    d = a + r * (b - a);
  }
  return g(0.5 * (a + b));
}

TestFunction sinusoid(std::vector<double> direction, double omega, double phase, double alpha,
                      double amplitude) {
  double norm = 0.0;
  for (double v : direction) norm += v * v;
  norm = std::sqrt(norm);
  if (norm == 0.0) throw InvalidArgument("sinusoid direction must be nonzero");
  for (double& v : direction) v /= norm;
  TestFunction phi;
  char id[64];
  std::snprintf(id, sizeof id, "sin_w%g_p%.4f", omega, phase);
  phi.id = id;
  phi.holder_norm = std::abs(amplitude) * (1.0 + sine_holder_constant(alpha) * std::pow(omega, alpha));
  auto theta = [direction, omega, phase](std::span<const double> x) {
    double t = phase;
    for (std::size_t i = 0; i < direction.size(); ++i) t += omega * direction[i] * x[i];
    return t;
  };
  phi.value = [theta, amplitude](std::span<const double> x) { return amplitude * std::sin(theta(x)); };
  // Delta_h^n sin(theta) = Im[e^{i theta} (e^{i a} - 1)^n] = (2 sin(a/2))^n sin(theta + n (a + pi) / 2).
  phi.difference = [theta, direction, omega, amplitude](std::span<const double> x,
                                                        std::span<const double> h, int n) {
    double a = 0.0;
    for (std::size_t i = 0; i < direction.size(); ++i) a += omega * direction[i] * h[i];
    return amplitude * std::pow(2.0 * std::sin(0.5 * a), n) *
           std::sin(theta(x) + 0.5 * double(n) * (a + std::numbers::pi));
  };
  return phi;
}

std::vector<TestFunction> sinusoid_family(std::vector<double> direction, double alpha,
                                          double max_omega, double amplitude) {
  std::vector<TestFunction> family;
  for (double w = 1.0; w <= max_omega * (1.0 + 1e-12); w *= 2.0) {
    for (double phase : {0.0, 0.5 * std::numbers::pi}) {
      family.push_back(sinusoid(direction, w, phase, alpha, amplitude));
    }
  }
  return family;
}

std::string to_string(BesovVerdict v) {
  switch (v) {
    case BesovVerdict::Pass: return "pass";
    case BesovVerdict::Fail: return "fail";
    case BesovVerdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

double predicted_exponent(double alpha, int n, bool stationary) {
  const double c = stationary ? 3.0 : 2.0;
  return c * alpha * double(n) / (c * alpha + double(n));
}

std::string BesovReport::estimates_csv() const {
  std::ostringstream os;
  os << "phi_id,h_magnitude,estimate,std_error,holder_norm,above_floor\n";
  for (const auto& e : estimates) {
    os << e.phi_id << "," << format_g(e.h_magnitude) << "," << format_g(e.estimate) << ","
       << format_g(e.std_error) << "," << format_g(e.holder_norm) << "," << (e.above_floor ? 1 : 0)
       << "\n";
  }
  return os.str();
}

std::string BesovReport::seminorm_csv() const {
  std::ostringstream os;
  os << "s,n,seminorm,l1_norm,sup_ratio\n";
  for (const auto& s : seminorms) {
    os << format_g(s.s) << "," << s.n << "," << format_g(s.value) << "," << format_g(s.l1_norm)
       << "," << format_g(s.sup_ratio) << "\n";
  }
  return os.str();
}

std::string BesovReport::text() const {
  std::ostringstream os;
  os << "samples = " << sample_count << "\n";
  os << "n = " << n << ", alpha = " << alpha << ", stationary = " << (stationary ? "yes" : "no")
     << "\n";
  os << "alpha_n_predicted = " << format_g(alpha_n_predicted) << "\n";
  os << "envelope_points = " << envelope_fit.points << "\n";
  if (envelope_fit.valid) {
    os << "envelope_slope = " << format_g(envelope_fit.slope) << " +- "
       << format_g(envelope_fit.slope_error) << "\n";
    os << "envelope_intercept = " << format_g(envelope_fit.intercept) << "\n";
    os << "envelope_residual = " << format_g(envelope_fit.residual) << "\n";
  }
  for (const auto& f : phi_fits) {
    if (!f.valid) continue;
    os << "slope[" << f.id << "] = " << format_g(f.slope) << " (" << f.points << " points)\n";
  }
  os << "verdict = " << to_string(verdict) << "\n";
  return os.str();
}

BesovReport weak_exponent_experiment(std::span<const double> samples, std::size_t d,
                                     const std::vector<TestFunction>& family,
                                     const WeakExperimentOptions& options) {
  check_dim(d);
  if (samples.empty() || samples.size() % d != 0) throw InvalidArgument("sample array is not n x d");
  if (family.empty()) throw InvalidArgument("empty test-function family");
  if (options.n < 1) throw InvalidArgument("difference order must be >= 1");
  if (options.h_magnitudes.empty()) throw InvalidArgument("empty h sweep");
  const std::size_t count = samples.size() / d;
  std::vector<double> dir = options.direction;
  if (dir.empty()) dir.assign(d, 1.0 / std::sqrt(double(d)));
  if (dir.size() != d) throw InvalidArgument("direction dimension mismatch");
  double dn = 0.0;
  for (double v : dir) dn += v * v;
  dn = std::sqrt(dn);
  for (double& v : dir) v /= dn;

  BesovReport rep;
  rep.n = options.n;
  rep.alpha = options.alpha;
  rep.stationary = options.stationary;
  rep.alpha_n_predicted = predicted_exponent(options.alpha, options.n, options.stationary);
  rep.slope_tolerance = options.slope_tolerance;
  rep.sample_count = count;

  const auto coef = binomial_signs(options.n);
  std::vector<double> values(count), shifted(d), h(d);
  for (const auto& phi : family) {
    for (double hm : options.h_magnitudes) {
      if (!(hm > 0.0 && hm <= 1.0)) throw InvalidArgument("|h| must lie in (0, 1]");
      for (std::size_t i = 0; i < d; ++i) h[i] = hm * dir[i];
      for (std::size_t s = 0; s < count; ++s) {
        const std::span<const double> x = samples.subspan(s * d, d);
        if (phi.difference) {
          values[s] = phi.difference(x, h, options.n);
        } else {
          double acc = 0.0;
          for (int j = 0; j <= options.n; ++j) {
            for (std::size_t i = 0; i < d; ++i) shifted[i] = x[i] + double(j) * h[i];
            acc += coef[j] * phi.value(shifted);
          }
          values[s] = acc;
        }
      }
      const auto e = stats::mean_estimate(values);
      WeakEstimate w;
      w.phi_id = phi.id;
      w.h_magnitude = hm;
      w.estimate = e.mean;
      w.std_error = e.std_error;
      w.holder_norm = phi.holder_norm;
      w.above_floor = std::abs(e.mean) > options.noise_floor_z * e.std_error &&
                      std::abs(e.mean) > 1e-13 * phi.holder_norm;
      rep.estimates.push_back(w);
    }
  }

  auto fit_points = [](const std::string& id, const std::vector<double>& hs,
                       const std::vector<double>& ys) {
    ExponentFit f;
    f.id = id;
    f.points = hs.size();
    if (hs.size() < 2) return f;
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < hs.size(); ++i) {
      lx.push_back(std::log(hs[i]));
      ly.push_back(std::log(ys[i]));
    }
    const auto lf = stats::linear_fit(lx, ly);
    f.slope = lf.slope;
    f.intercept = lf.intercept;
    f.residual = lf.residual;
    f.slope_error = lf.slope_error;
    f.valid = true;
    return f;
  };

  const std::size_t H = options.h_magnitudes.size();
  for (std::size_t p = 0; p < family.size(); ++p) {
    std::vector<double> hs, ys;
    for (std::size_t j = 0; j < H; ++j) {
      const auto& e = rep.estimates[p * H + j];
      if (!e.above_floor) continue;
      hs.push_back(e.h_magnitude);
      ys.push_back(std::abs(e.estimate));
    }
    rep.phi_fits.push_back(fit_points(family[p].id, hs, ys));
  }
  for (std::size_t j = 0; j < H; ++j) {
    double best = -1.0, best_se = 0.0;
    for (std::size_t p = 0; p < family.size(); ++p) {
      const auto& e = rep.estimates[p * H + j];
      if (!e.above_floor) continue;
      const double v = std::abs(e.estimate) / e.holder_norm;
      if (v > best) {
        best = v;
        best_se = e.std_error / e.holder_norm;
      }
    }
    if (best <= 0.0) continue;
    rep.envelope_h.push_back(options.h_magnitudes[j]);
    rep.envelope.push_back(best);
    rep.envelope_std_error.push_back(best_se);
  }
  rep.envelope_fit = fit_points("envelope", rep.envelope_h, rep.envelope);
  if (!rep.envelope_fit.valid) {
    rep.verdict = BesovVerdict::Inconclusive;
  } else {
    rep.verdict = rep.envelope_fit.slope >= rep.alpha_n_predicted - options.slope_tolerance
                      ? BesovVerdict::Pass
                      : BesovVerdict::Fail;
  }
  return rep;
}

BesovReport weak_exponent_experiment(std::span<const double> samples, std::size_t d,
                                     const WeakExperimentOptions& options) {
  std::vector<double> dir = options.direction;
  if (dir.empty()) dir.assign(d, 1.0 / std::sqrt(double(d)));
  return weak_exponent_experiment(
      samples, d, sinusoid_family(dir, options.alpha, options.max_omega, options.amplitude), options);
}

std::vector<double> lp_sweep(std::size_t d) {
  if (d < 1) throw InvalidArgument("dimension must be >= 1");
  if (d == 1) return {1.0, 2.0, 4.0};
  const double pmax = double(d) / double(d - 1);
  return {1.0, 1.0 + 0.5 * (pmax - 1.0), 1.0 + 0.9 * (pmax - 1.0)};
}

LpReport lp_membership_report(const GridFunction& f, std::size_t d) {
  LpReport rep;
  rep.d = d;
  rep.p_max = d == 1 ? std::numeric_limits<double>::infinity() : double(d) / double(d - 1);
  for (double p : lp_sweep(d)) {
    LpEntry e;
    e.p = p;
    e.norm = f.lp_norm(p);
    e.refined_norm = std::numeric_limits<double>::quiet_NaN();
    e.relative_change = std::numeric_limits<double>::quiet_NaN();
    rep.entries.push_back(e);
  }
  return rep;
}

LpReport lp_membership_report(const GridFunction& coarse, const GridFunction& fine, std::size_t d,
                              double tolerance) {
  LpReport rep = lp_membership_report(coarse, d);
  for (auto& e : rep.entries) {
    e.refined_norm = fine.lp_norm(e.p);
    e.relative_change = e.norm > 0.0 ? std::abs(e.refined_norm - e.norm) / e.norm
                                     : std::numeric_limits<double>::infinity();
    e.stable = e.relative_change <= tolerance;
    rep.stable = rep.stable && e.stable;
  }
  return rep;
}

std::string LpReport::csv() const {
  std::ostringstream os;
  os << "p,norm,refined_norm,relative_change,stable\n";
  for (const auto& e : entries) {
    os << format_g(e.p) << "," << format_g(e.norm) << "," << format_g(e.refined_norm) << ","
       << format_g(e.relative_change) << "," << (e.stable ? 1 : 0) << "\n";
  }
  return os.str();
}

}  // namespace snslab
