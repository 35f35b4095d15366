#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "snslab/error.hpp"

namespace snslab {

/// Uniform rectangular grid of cells on a box in R^d, d in {1, 2, 3}.
/// Cell (i_0, ..., i_{d-1}) covers [origin + i * spacing, origin + (i + 1) * spacing);
/// storage is row-major with the last axis fastest.
struct GridGeometry {
  std::vector<double> origin;
  std::vector<double> spacing;
  std::vector<std::size_t> counts;

  GridGeometry() = default;
  /// Box [lo, hi] split into `counts` cells per axis.
  GridGeometry(std::vector<double> lo, std::vector<double> hi, std::vector<std::size_t> counts);

  std::size_t dim() const { return counts.size(); }
  std::size_t size() const;
  double cell_volume() const;
  std::vector<double> upper() const;
  std::vector<double> center(std::size_t flat) const;
  std::size_t flat(std::span<const std::size_t> index) const;
  std::vector<std::size_t> unflatten(std::size_t flat) const;
  /// Same box with every axis split `factor` times finer.
  GridGeometry refined(std::size_t factor) const;
};

struct GridFunction {
  GridGeometry grid;
  std::vector<double> values;

  GridFunction() = default;
  explicit GridFunction(GridGeometry g) : grid(std::move(g)), values(grid.size(), 0.0) {}
  GridFunction(GridGeometry g, std::vector<double> v);

  /// Cell-center samples of fn.
  static GridFunction sample(GridGeometry g, const std::function<double(std::span<const double>)>& fn);

  /// sum |f|^p * cell volume, to the power 1/p.
  double lp_norm(double p) const;
  /// sum f * cell volume.
  double integral() const;
};

/// Difference order n and step h (physical units, 0 < |h| <= 1).
struct DifferenceSpec {
  int n = 1;
  std::vector<double> h;

  double magnitude() const;
};

/// Step h expressed in cells; throws unless every component is an integer
/// multiple of the spacing (relative tolerance 1e-9) and h != 0.
std::vector<long> aligned_steps(const GridGeometry& grid, std::span<const double> h);

/// (Delta_h^n f)(x) = sum_j (-1)^(n-j) C(n,j) f(x + j h) on the cells x for
/// which every x + j h lies in the box; the result lives on that reduced grid.
GridFunction difference_apply(const GridFunction& f, const DifferenceSpec& spec);
GridFunction difference_apply(const GridFunction& f, std::span<const long> steps, int n);

enum class DensityEstimator { Histogram, ProductKernel };

std::string to_string(DensityEstimator e);

struct EmpiricalDensity {
  GridFunction density;
  DensityEstimator estimator = DensityEstimator::Histogram;
  /// Kernel bandwidth per axis (product kernel only).
  std::vector<double> bandwidth;
  std::size_t sample_count = 0;
  /// Fraction of the sample mass inside the box (= integral of the density).
  double total_mass = 0.0;
  double out_of_box_fraction = 0.0;
  /// Largest single-cell mass as a fraction of all samples.
  double max_cell_mass = 0.0;
  /// Set when one cell carries at least half of the in-box mass: the input
  /// behaves like an atom, not a density.
  bool atom_like = false;
};

struct DensityOptions {
  DensityEstimator estimator = DensityEstimator::Histogram;
  /// Product-kernel bandwidths; empty selects Scott's rule per axis.
  std::vector<double> bandwidth;
  std::size_t min_samples = 1000;
};

/// Box mean +- width * standard deviation per axis of row-major samples.
std::pair<std::vector<double>, std::vector<double>> sample_box(std::span<const double> samples,
                                                               std::size_t d, double width);

/// Normalized density of row-major samples (n x d) on `grid`.
EmpiricalDensity estimate_density(std::span<const double> samples, const GridGeometry& grid,
                                  const DensityOptions& options = {});

/// sum |f - g| * cell volume on a common grid.
double l1_distance(const GridFunction& f, const GridFunction& g);
/// L^1 distance to an analytic density by midpoint quadrature on
/// `subdivisions`^d sub-cells per cell.
double l1_distance(const GridFunction& f, const std::function<double(std::span<const double>)>& g,
                   int subdivisions = 4);

struct SeminormTerm {
  double h_magnitude = 0.0;
  double difference_l1 = 0.0;
  double ratio = 0.0;  // difference_l1 / |h|^s
};

struct SeminormEstimate {
  double s = 0.0;
  int n = 0;
  double l1_norm = 0.0;
  double sup_ratio = 0.0;
  double value = 0.0;  // l1_norm + sup_ratio
  std::vector<SeminormTerm> terms;
};

/// ||f||_{L^1} + max over the sweep of ||Delta_h^n f||_{L^1} / |h|^s.
SeminormEstimate besov_seminorm_estimate(const GridFunction& f, double s, int n,
                                         const std::vector<std::vector<double>>& h_sweep);

/// Steps 2^-1, ..., 2^-levels along `direction` (normalized), rounded to the
/// nearest nonzero multiple of the grid spacing per axis.
std::vector<std::vector<double>> dyadic_aligned_sweep(const GridGeometry& grid,
                                                      std::span<const double> direction,
                                                      int levels);

/// Bounded test function with an analytic C^alpha norm.
struct TestFunction {
  std::string id;
  std::function<double(std::span<const double>)> value;
  /// Closed-form (Delta_h^n phi)(x); if empty the binomial sum is used.
  std::function<double(std::span<const double>, std::span<const double>, int)> difference;
  double holder_norm = 0.0;
};

/// max over theta > 0 of 2 |sin(theta / 2)| / theta^alpha, so that
/// |sin(w t) - sin(w s)| <= holder_constant(alpha) * w^alpha |t - s|^alpha sharply.
double sine_holder_constant(double alpha);

/// amplitude * sin(omega <e, x> + phase) with ||.||_{C^alpha} = amplitude (1 + c_alpha omega^alpha).
TestFunction sinusoid(std::vector<double> direction, double omega, double phase, double alpha,
                      double amplitude = 1.0);

/// Sinusoids with omega in {1, 2, 4, ..., max_omega} and phases {0, pi/2}.
std::vector<TestFunction> sinusoid_family(std::vector<double> direction, double alpha,
                                          double max_omega = 64.0, double amplitude = 1.0);

struct WeakEstimate {
  std::string phi_id;
  double h_magnitude = 0.0;
  double estimate = 0.0;
  double std_error = 0.0;
  double holder_norm = 0.0;
  bool above_floor = false;
};

struct ExponentFit {
  std::string id;
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;
  double slope_error = 0.0;
  std::size_t points = 0;
  bool valid = false;
};

enum class BesovVerdict { Pass, Fail, Inconclusive };

std::string to_string(BesovVerdict v);

struct BesovReport {
  int n = 2;
  double alpha = 0.5;
  bool stationary = false;
  double alpha_n_predicted = 0.0;
  double slope_tolerance = 0.2;
  std::size_t sample_count = 0;
  std::vector<WeakEstimate> estimates;
  /// Envelope S(h) = max over phi above the noise floor of |E Delta_h^n phi| / ||phi||_{C^alpha}.
  std::vector<double> envelope_h;
  std::vector<double> envelope;
  std::vector<double> envelope_std_error;
  ExponentFit envelope_fit;
  std::vector<ExponentFit> phi_fits;
  /// Optional gridded-density diagnostics.
  std::vector<SeminormEstimate> seminorms;
  BesovVerdict verdict = BesovVerdict::Inconclusive;

  /// (phi_id, h, estimate, std_error) table.
  std::string estimates_csv() const;
  /// (s, seminorm) table.
  std::string seminorm_csv() const;
  std::string text() const;
};

/// 2 alpha n / (2 alpha + n), or 3 alpha n / (3 alpha + n) in stationary mode.
double predicted_exponent(double alpha, int n, bool stationary);

struct WeakExperimentOptions {
  int n = 2;
  double alpha = 0.5;
  bool stationary = false;
  /// |h| values; steps are h * direction.
  std::vector<double> h_magnitudes = {0.5, 0.25, 0.125, 0.0625, 0.03125};
  std::vector<double> direction;  // defaults to (1, ..., 1) / sqrt(d)
  double noise_floor_z = 3.0;
  double slope_tolerance = 0.2;
  double max_omega = 64.0;
  double amplitude = 1.0;
};

/// Monte Carlo estimates of E[(Delta_h^n phi)(X)] over row-major samples of
/// X in R^d, per test function and step, with the log-log envelope fit.
BesovReport weak_exponent_experiment(std::span<const double> samples, std::size_t d,
                                     const std::vector<TestFunction>& family,
                                     const WeakExperimentOptions& options);
/// Same with the built-in sinusoid family.
BesovReport weak_exponent_experiment(std::span<const double> samples, std::size_t d,
                                     const WeakExperimentOptions& options);

struct LpEntry {
  double p = 1.0;
  double norm = 0.0;
  double refined_norm = 0.0;  // NaN when no refinement was given
  double relative_change = 0.0;
  bool stable = true;
};

struct LpReport {
  std::size_t d = 0;
  double p_max = 0.0;  // d / (d - 1), infinite for d = 1
  std::vector<LpEntry> entries;
  bool stable = true;

  std::string csv() const;
};

/// p sweep for dimension d: {1, 1 + (p_max - 1) / 2, 1 + 0.9 (p_max - 1)},
/// and {1, 2, 4} for d = 1.
std::vector<double> lp_sweep(std::size_t d);

LpReport lp_membership_report(const GridFunction& f, std::size_t d);
/// Compares the norms on `coarse` and `fine` (same box, refined grid).
LpReport lp_membership_report(const GridFunction& coarse, const GridFunction& fine, std::size_t d,
                              double tolerance = 0.15);

}  // namespace snslab
