#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "snslab/dynamics.hpp"
#include "snslab/error.hpp"

namespace snslab {

enum class ExperimentKind {
  Simulate,
  EnergyCheck,
  Girsanov,
  Malliavin,
  BesovWeak,
  BesovDensity,
  OuCheck,
  SplittingRate,
};

std::string to_string(ExperimentKind k);
/// Throws InvalidArgument listing the valid names.
ExperimentKind parse_kind(const std::string& name);
const std::vector<ExperimentKind>& all_kinds();

/// Parse failure with a 1-based source position.
class ConfigError : public InvalidArgument {
 public:
  ConfigError(int line, int column, const std::string& what)
      : InvalidArgument("config:" + std::to_string(line) + ":" + std::to_string(column) + ": " +
                        what),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

struct ExperimentConfig {
  struct Basis {
    int cutoff = 2;
    std::size_t modes = 0;  // 0 keeps every mode of the cutoff shell
    bool operator==(const Basis&) const = default;
  } basis;

  struct Dynamics {
    double viscosity = 1.0;
    Variant variant = Variant::Galerkin;
    double R = 0.0;
    std::vector<std::size_t> F = {0, 1};
    double epsilon = 0.0;
    SplitMode split_mode = SplitMode::Plain;
    bool stationary = false;
    bool nonlinear = true;
    bool operator==(const Dynamics&) const = default;
  } dynamics;

  struct Noise {
    CovarianceFamily family = CovarianceFamily::PowerLaw;
    double alpha = 3.0;
    std::vector<double> variances;
    bool operator==(const Noise&) const = default;
  } noise;

  struct Run {
    ExperimentKind kind = ExperimentKind::Simulate;
    double horizon = 1.0;
    double dt = 1e-3;
    std::vector<double> snapshots;
    std::size_t n_traj = 1000;
    std::uint64_t seed = 0;
    std::string out = "snslab_out";
    double initial_amplitude = 0.0;  // H norm of the initial state
    std::size_t initial_modes = 0;   // leading modes carrying it; 0 = all
    double burn_in = 1.0;
    unsigned workers = 0;            // 0 = SNSLAB_WORKERS or hardware threads
    bool write_snapshots = true;
    bool operator==(const Run&) const = default;
  } run;

  struct Stats {
    double z_tolerance = 3.0;
    double exact_z_tolerance = 4.0;
    double ks_alpha = 0.01;
    double min_effective_sample_size = 100.0;
    double slope_tolerance = 0.2;
    double control_min_slope = 1.8;
    double split_min_slope = 0.9;
    double split_compensated_min_slope = 1.2;
    double l1_tolerance = 0.1;
    double lp_tolerance = 0.15;
    double atom_fraction = 0.01;
    double nondegeneracy_threshold = 1e-12;
    double stationarity_z = 3.0;
    bool operator==(const Stats&) const = default;
  } stats;

  struct Besov {
    double alpha = 0.5;
    int n = 2;
    std::vector<double> h = {0.5, 0.25, 0.125, 0.0625, 0.03125};
    double max_omega = 64.0;
    double floor_z = 3.0;
    bool operator==(const Besov&) const = default;
  } besov;

  struct Density {
    std::size_t cells = 32;
    std::size_t refine = 2;
    double box_width = 5.0;  // half-width of the box in standard deviations
    bool operator==(const Density&) const = default;
  } density;

  struct Splitting {
    std::vector<double> epsilons = {0.125, 0.0625, 0.03125, 0.015625, 0.0078125};
    std::vector<SplitMode> modes = {SplitMode::Plain};
    bool operator==(const Splitting&) const = default;
  } splitting;

  struct Malliavin {
    std::size_t stride = 1;
    bool operator==(const Malliavin&) const = default;
  } malliavin;

  bool operator==(const ExperimentConfig&) const = default;

  /// Throws InvalidArgument naming the offending keys.
  void validate() const;
};

/// Sectioned `key = value` text. Values are numbers, true/false, quoted or
/// bare strings, or single-line arrays `[a, b]`; `#` starts a comment.
/// Unknown sections and keys are rejected; the result is validated.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Every key with its resolved value, in parse_config syntax.
std::string serialize_config(const ExperimentConfig& config);

}  // namespace snslab
