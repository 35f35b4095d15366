#include "snslab/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "snslab/io.hpp"

namespace snslab {

namespace {

const std::vector<std::pair<ExperimentKind, const char*>> kKindNames = {
    {ExperimentKind::Simulate, "simulate"},
    {ExperimentKind::EnergyCheck, "energy-check"},
    {ExperimentKind::Girsanov, "girsanov"},
    {ExperimentKind::Malliavin, "malliavin"},
    {ExperimentKind::BesovWeak, "besov-weak"},
    {ExperimentKind::BesovDensity, "besov-density"},
    {ExperimentKind::OuCheck, "ou-check"},
    {ExperimentKind::SplittingRate, "splitting-rate"},
};

struct Value {
  enum class Type { Number, String, Bool, Array } type = Type::String;
  std::string text;
  bool boolean = false;
  std::vector<Value> items;
  int line = 0;
  int column = 0;
};

[[noreturn]] void fail(const Value& v, const std::string& what) {
  throw ConfigError(v.line, v.column, what);
}

double as_real(const Value& v, const std::string& key) {
  if (v.type != Value::Type::Number) fail(v, key + " expects a number");
  double x = 0.0;
  const auto r = std::from_chars(v.text.data(), v.text.data() + v.text.size(), x);
  if (r.ec != std::errc() || r.ptr != v.text.data() + v.text.size() || !std::isfinite(x)) {
    fail(v, key + ": '" + v.text + "' is not a finite number");
  }
  return x;
}

std::uint64_t as_uint(const Value& v, const std::string& key) {
  if (v.type != Value::Type::Number) fail(v, key + " expects a nonnegative integer");
  std::uint64_t x = 0;
  const auto r = std::from_chars(v.text.data(), v.text.data() + v.text.size(), x);
  if (r.ec == std::errc() && r.ptr == v.text.data() + v.text.size()) return x;
  // Accept integral values written in floating-point notation, e.g. 1e5.
  const double d = as_real(v, key);
  if (d < 0.0 || d != std::floor(d) || d > 9007199254740992.0) {
    fail(v, key + " expects a nonnegative integer, got '" + v.text + "'");
  }
  return static_cast<std::uint64_t>(d);
}

bool as_bool(const Value& v, const std::string& key) {
  if (v.type != Value::Type::Bool) fail(v, key + " expects true or false");
  return v.boolean;
}

std::string as_string(const Value& v, const std::string& key) {
  if (v.type != Value::Type::String) fail(v, key + " expects a string");
  return v.text;
}

const std::vector<Value>& as_array(const Value& v, const std::string& key) {
  if (v.type != Value::Type::Array) fail(v, key + " expects an array [a, b, ...]");
  return v.items;
}

std::vector<double> as_real_list(const Value& v, const std::string& key) {
  std::vector<double> out;
  for (const auto& item : as_array(v, key)) out.push_back(as_real(item, key));
  return out;
}

std::vector<std::size_t> as_index_list(const Value& v, const std::string& key) {
  std::vector<std::size_t> out;
  for (const auto& item : as_array(v, key)) out.push_back(as_uint(item, key));
  return out;
}

Variant as_variant(const Value& v, const std::string& key) {
  const std::string s = as_string(v, key);
  for (Variant x : {Variant::Galerkin, Variant::Truncated, Variant::Split, Variant::DriftRemoved}) {
    if (s == to_string(x)) return x;
  }
  fail(v, key + ": unknown variant '" + s + "' (galerkin, truncated, split, drift_removed)");
}

SplitMode as_split_mode(const Value& v, const std::string& key) {
  const std::string s = as_string(v, key);
  for (SplitMode m : {SplitMode::Plain, SplitMode::StationaryCompensated}) {
    if (s == to_string(m)) return m;
  }
  fail(v, key + ": unknown split mode '" + s + "' (plain, stationary_compensated)");
}

std::string number(double x) { return io::csv_number(x); }

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

template <class T, class F>
std::string list(const std::vector<T>& xs, F&& fmt) {
  std::string out = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    out += fmt(xs[i]);
  }
  return out + "]";
}

std::string family_name(CovarianceFamily f) {
  return f == CovarianceFamily::PowerLaw ? "power_law" : "explicit";
}

struct Field {
  const char* section;
  const char* key;
  std::function<void(ExperimentConfig&, const Value&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define SNSLAB_REAL(sec, name, member)                                                         \
  Field {                                                                                      \
    sec, name, [](ExperimentConfig& c, const Value& v, const std::string& k) { c.member = as_real(v, k); }, \
        [](const ExperimentConfig& c) { return number(c.member); }                          \
  }
#define SNSLAB_UINT(sec, name, member, type)                                                   \
  Field {                                                                                      \
    sec, name,                                                                                 \
        [](ExperimentConfig& c, const Value& v, const std::string& k) {                        \
          const auto x = as_uint(v, k);                                                        \
          if (x > std::uint64_t(std::numeric_limits<type>::max())) fail(v, k + " is too large"); \
          c.member = static_cast<type>(x);                                                     \
        },                                                                                     \
        [](const ExperimentConfig& c) { return std::to_string(c.member); }                    \
  }
#define SNSLAB_BOOL(sec, name, member)                                                         \
  Field {                                                                                      \
    sec, name, [](ExperimentConfig& c, const Value& v, const std::string& k) { c.member = as_bool(v, k); }, \
        [](const ExperimentConfig& c) { return std::string(c.member ? "true" : "false"); }     \
  }
#define SNSLAB_REALS(sec, name, member)                                                        \
  Field {                                                                                      \
    sec, name,                                                                                 \
        [](ExperimentConfig& c, const Value& v, const std::string& k) { c.member = as_real_list(v, k); }, \
        [](const ExperimentConfig& c) { return list(c.member, number); }                      \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      SNSLAB_UINT("basis", "cutoff", basis.cutoff, int),
      SNSLAB_UINT("basis", "modes", basis.modes, std::size_t),

      SNSLAB_REAL("dynamics", "viscosity", dynamics.viscosity),
      Field{"dynamics", "variant",
            [](ExperimentConfig& c, const Value& v, const std::string& k) {
              c.dynamics.variant = as_variant(v, k);
            },
            [](const ExperimentConfig& c) { return quoted(to_string(c.dynamics.variant)); }},
      SNSLAB_REAL("dynamics", "R", dynamics.R),
      Field{"dynamics", "F",
            [](ExperimentConfig& c, const Value& v, const std::string& k) {
              c.dynamics.F = as_index_list(v, k);
            },
            [](const ExperimentConfig& c) {
              return list(c.dynamics.F, [](std::size_t i) { return std::to_string(i); });
            }},
      SNSLAB_REAL("dynamics", "epsilon", dynamics.epsilon),
      Field{"dynamics", "split_mode",
            [](ExperimentConfig& c, const Value& v, const std::string& k) {
              c.dynamics.split_mode = as_split_mode(v, k);
            },
            [](const ExperimentConfig& c) { return quoted(to_string(c.dynamics.split_mode)); }},
      SNSLAB_BOOL("dynamics", "stationary", dynamics.stationary),
      SNSLAB_BOOL("dynamics", "nonlinear", dynamics.nonlinear),

      Field{"noise", "family",
            [](ExperimentConfig& c, const Value& v, const std::string& k) {
              const std::string s = as_string(v, k);
              if (s == "power_law") {
                c.noise.family = CovarianceFamily::PowerLaw;
              } else if (s == "explicit") {
                c.noise.family = CovarianceFamily::ExplicitList;
              } else {
                fail(v, k + ": unknown covariance family '" + s + "' (power_law, explicit)");
              }
            },
            [](const ExperimentConfig& c) { return quoted(family_name(c.noise.family)); }},
      SNSLAB_REAL("noise", "alpha", noise.alpha),
      SNSLAB_REALS("noise", "variances", noise.variances),

      Field{"run", "kind",
            [](ExperimentConfig& c, const Value& v, const std::string& k) {
              try {
                c.run.kind = parse_kind(as_string(v, k));
              } catch (const ConfigError&) {
                throw;
              } catch (const InvalidArgument& e) {
                fail(v, k + ": " + e.what());
              }
            },
            [](const ExperimentConfig& c) { return quoted(to_string(c.run.kind)); }},
      SNSLAB_REAL("run", "horizon", run.horizon),
      SNSLAB_REAL("run", "dt", run.dt),
      SNSLAB_REALS("run", "snapshots", run.snapshots),
      SNSLAB_UINT("run", "n_traj", run.n_traj, std::size_t),
      SNSLAB_UINT("run", "seed", run.seed, std::uint64_t),
      Field{"run", "out",
            [](ExperimentConfig& c, const Value& v, const std::string& k) {
              c.run.out = as_string(v, k);
            },
            [](const ExperimentConfig& c) { return quoted(c.run.out); }},
      SNSLAB_REAL("run", "initial_amplitude", run.initial_amplitude),
      SNSLAB_UINT("run", "initial_modes", run.initial_modes, std::size_t),
      SNSLAB_REAL("run", "burn_in", run.burn_in),
      SNSLAB_UINT("run", "workers", run.workers, unsigned),
      SNSLAB_BOOL("run", "write_snapshots", run.write_snapshots),

      SNSLAB_REAL("stats", "z_tolerance", stats.z_tolerance),
      SNSLAB_REAL("stats", "exact_z_tolerance", stats.exact_z_tolerance),
      SNSLAB_REAL("stats", "ks_alpha", stats.ks_alpha),
      SNSLAB_REAL("stats", "min_effective_sample_size", stats.min_effective_sample_size),
      SNSLAB_REAL("stats", "slope_tolerance", stats.slope_tolerance),
      SNSLAB_REAL("stats", "control_min_slope", stats.control_min_slope),
      SNSLAB_REAL("stats", "split_min_slope", stats.split_min_slope),
      SNSLAB_REAL("stats", "split_compensated_min_slope", stats.split_compensated_min_slope),
      SNSLAB_REAL("stats", "l1_tolerance", stats.l1_tolerance),
      SNSLAB_REAL("stats", "lp_tolerance", stats.lp_tolerance),
      SNSLAB_REAL("stats", "atom_fraction", stats.atom_fraction),
      SNSLAB_REAL("stats", "nondegeneracy_threshold", stats.nondegeneracy_threshold),
      SNSLAB_REAL("stats", "stationarity_z", stats.stationarity_z),

      SNSLAB_REAL("besov", "alpha", besov.alpha),
      Field{"besov", "n",
            [](ExperimentConfig& c, const Value& v, const std::string& k) {
              const auto x = as_uint(v, k);
              if (x > 16) fail(v, k + " must be at most 16");
              c.besov.n = static_cast<int>(x);
            },
            [](const ExperimentConfig& c) { return std::to_string(c.besov.n); }},
      SNSLAB_REALS("besov", "h", besov.h),
      SNSLAB_REAL("besov", "max_omega", besov.max_omega),
      SNSLAB_REAL("besov", "floor_z", besov.floor_z),

      SNSLAB_UINT("density", "cells", density.cells, std::size_t),
      SNSLAB_UINT("density", "refine", density.refine, std::size_t),
      SNSLAB_REAL("density", "box_width", density.box_width),

      SNSLAB_REALS("splitting", "epsilons", splitting.epsilons),
      Field{"splitting", "modes",
            [](ExperimentConfig& c, const Value& v, const std::string& k) {
              c.splitting.modes.clear();
              for (const auto& item : as_array(v, k)) {
                c.splitting.modes.push_back(as_split_mode(item, k));
              }
            },
            [](const ExperimentConfig& c) {
              return list(c.splitting.modes, [](SplitMode m) { return quoted(to_string(m)); });
            }},

      SNSLAB_UINT("malliavin", "stride", malliavin.stride, std::size_t),
  };
  return table;
}

#undef SNSLAB_REAL
#undef SNSLAB_UINT
#undef SNSLAB_BOOL
#undef SNSLAB_REALS

class LineParser {
 public:
  LineParser(const std::string& line, int line_no) : s_(line), line_(line_no) {}

  void skip_space() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\r')) ++pos_;
  }
  bool at_end() {
    skip_space();
    return pos_ >= s_.size() || s_[pos_] == '#';
  }
  char peek() {
    skip_space();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }
  int column() const { return static_cast<int>(pos_) + 1; }
  [[noreturn]] void error(const std::string& what) const { throw ConfigError(line_, column(), what); }

  void expect(char c) {
    if (peek() != c) error(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string identifier() {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) ||
                                s_[pos_] == '_' || s_[pos_] == '-' || s_[pos_] == '.')) {
      ++pos_;
    }
    if (pos_ == start) error("expected a name");
    return s_.substr(start, pos_ - start);
  }

  Value value() {
    skip_space();
    Value v;
    v.line = line_;
    v.column = column();
    if (pos_ >= s_.size() || s_[pos_] == '#') error("missing value");
    const char c = s_[pos_];
    if (c == '[') {
      ++pos_;
      v.type = Value::Type::Array;
      if (peek() == ']') {
        ++pos_;
        return v;
      }
      for (;;) {
        Value item = value();
        if (item.type == Value::Type::Array) error("nested arrays are not supported");
        v.items.push_back(std::move(item));
        const char d = peek();
        if (d == ',') {
          ++pos_;
        } else if (d == ']') {
          ++pos_;
          return v;
        } else {
          error("expected ',' or ']' in array");
        }
      }
    }
    if (c == '"') {
      ++pos_;
      v.type = Value::Type::String;
      while (pos_ < s_.size() && s_[pos_] != '"') {
        if (s_[pos_] == '\\') {
          if (++pos_ >= s_.size()) break;
        }
        v.text += s_[pos_++];
      }
      if (pos_ >= s_.size()) error("unterminated string");
      ++pos_;
      return v;
    }
    const std::size_t start = pos_;
    while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != ']' && s_[pos_] != '#' &&
           s_[pos_] != ' ' && s_[pos_] != '\t' && s_[pos_] != '\r') {
      ++pos_;
    }
    v.text = s_.substr(start, pos_ - start);
    if (v.text == "true" || v.text == "false") {
      v.type = Value::Type::Bool;
      v.boolean = v.text == "true";
    } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.') {
      v.type = Value::Type::Number;
      if (v.text.front() == '+') v.text.erase(0, 1);
    } else {
      v.type = Value::Type::String;
    }
    return v;
  }

 private:
  const std::string& s_;
  int line_;
  std::size_t pos_ = 0;
};

bool aligned(double span, double dt) {
  const double r = span / dt;
  return std::abs(r - std::round(r)) <= 1e-9 * std::max(1.0, r);
}

}  // namespace

std::string to_string(ExperimentKind k) {
  for (const auto& [kind, name] : kKindNames) {
    if (kind == k) return name;
  }
  return "?";
}

ExperimentKind parse_kind(const std::string& name) {
  std::string valid;
  for (const auto& [kind, n] : kKindNames) {
    if (name == n) return kind;
    valid += valid.empty() ? "" : ", ";
    valid += n;
  }
  throw InvalidArgument("unknown experiment kind '" + name + "' (" + valid + ")");
}

const std::vector<ExperimentKind>& all_kinds() {
  static const std::vector<ExperimentKind> kinds = [] {
    std::vector<ExperimentKind> out;
    for (const auto& entry : kKindNames) out.push_back(entry.first);
    return out;
  }();
  return kinds;
}

void ExperimentConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw InvalidArgument(what);
  };
  require(basis.cutoff >= 1, "basis.cutoff must be at least 1");
  const std::size_t shell = build_basis(basis.cutoff)->size();
  require(basis.modes <= shell, "basis.modes = " + std::to_string(basis.modes) +
                                    " exceeds the " + std::to_string(shell) +
                                    " modes of basis.cutoff = " + std::to_string(basis.cutoff));
  const std::size_t n_modes = basis.modes ? basis.modes : shell;

  require(dynamics.viscosity > 0.0, "dynamics.viscosity must be positive");
  std::set<std::size_t> seen;
  for (std::size_t k : dynamics.F) {
    require(k < n_modes, "dynamics.F contains mode " + std::to_string(k) + " outside the " +
                             std::to_string(n_modes) + "-mode basis");
    require(seen.insert(k).second, "dynamics.F lists mode " + std::to_string(k) + " twice");
  }
  require(run.horizon > 0.0, "run.horizon must be positive");
  require(run.dt > 0.0, "run.dt must be positive");
  require(run.dt <= run.horizon, "run.dt must not exceed run.horizon");
  require(aligned(run.horizon, run.dt), "run.horizon must be an integer multiple of run.dt");
  switch (dynamics.variant) {
    case Variant::Truncated:
      require(dynamics.R > 0.0, "dynamics.variant = truncated needs dynamics.R > 0");
      break;
    case Variant::Split:
      require(dynamics.epsilon > 0.0, "dynamics.variant = split needs dynamics.epsilon > 0");
      require(dynamics.epsilon < run.horizon,
              "dynamics.epsilon = " + number(dynamics.epsilon) +
                  " must be smaller than run.horizon = " + number(run.horizon));
      require(!dynamics.F.empty(), "dynamics.variant = split needs a nonempty dynamics.F");
      break;
    case Variant::DriftRemoved:
      require(!dynamics.F.empty(), "dynamics.variant = drift_removed needs a nonempty dynamics.F");
      break;
    case Variant::Galerkin: break;
  }

  if (noise.family == CovarianceFamily::PowerLaw) {
    require(noise.variances.empty(), "noise.variances is only used with noise.family = explicit");
  } else {
    require(noise.variances.size() == n_modes,
            "noise.variances has " + std::to_string(noise.variances.size()) +
                " entries, the basis has " + std::to_string(n_modes) + " modes");
    for (double v : noise.variances) require(v >= 0.0, "noise.variances must be nonnegative");
  }

  for (double t : run.snapshots) {
    require(t >= 0.0 && t <= run.horizon,
            "run.snapshots entry " + number(t) + " outside [0, run.horizon]");
  }
  require(run.n_traj >= 1, "run.n_traj must be at least 1");
  require(run.initial_amplitude >= 0.0, "run.initial_amplitude must be nonnegative");
  require(run.initial_modes <= n_modes, "run.initial_modes exceeds the basis size");
  require(!dynamics.stationary || run.burn_in > 0.0,
          "dynamics.stationary = true needs run.burn_in > 0");
  require(!dynamics.stationary || aligned(run.burn_in, run.dt),
          "run.burn_in must be an integer multiple of run.dt");
  require(!run.out.empty(), "run.out must not be empty");

  for (double x : {stats.z_tolerance, stats.exact_z_tolerance, stats.min_effective_sample_size,
                   stats.slope_tolerance, stats.l1_tolerance, stats.lp_tolerance,
                   stats.atom_fraction, stats.nondegeneracy_threshold, stats.stationarity_z}) {
    require(x > 0.0, "stats tolerances must be positive");
  }
  require(stats.ks_alpha > 0.0 && stats.ks_alpha < 1.0, "stats.ks_alpha must lie in (0, 1)");

  require(besov.n >= 1, "besov.n must be at least 1");
  require(besov.alpha > 0.0, "besov.alpha must be positive");
  require(!besov.h.empty(), "besov.h must not be empty");
  for (double h : besov.h) require(h > 0.0 && h <= 1.0, "besov.h entries must lie in (0, 1]");
  require(besov.max_omega >= 1.0, "besov.max_omega must be at least 1");
  require(besov.floor_z >= 0.0, "besov.floor_z must be nonnegative");

  require(density.cells >= 2, "density.cells must be at least 2");
  require(density.refine >= 2, "density.refine must be at least 2");
  require(density.box_width > 0.0, "density.box_width must be positive");

  require(malliavin.stride >= 1, "malliavin.stride must be at least 1");

  const bool needs_F = run.kind == ExperimentKind::Girsanov ||
                       run.kind == ExperimentKind::Malliavin ||
                       run.kind == ExperimentKind::BesovWeak ||
                       run.kind == ExperimentKind::BesovDensity ||
                       run.kind == ExperimentKind::OuCheck ||
                       run.kind == ExperimentKind::SplittingRate;
  require(!needs_F || !dynamics.F.empty(),
          "run.kind = " + to_string(run.kind) + " needs a nonempty dynamics.F");
  if (run.kind == ExperimentKind::BesovDensity) {
    require(dynamics.F.size() <= 3, "run.kind = besov-density supports |dynamics.F| <= 3");
  }
  if (run.kind == ExperimentKind::Girsanov) {
    require(dynamics.variant == Variant::Galerkin,
            "run.kind = girsanov needs dynamics.variant = galerkin");
    require(!dynamics.stationary, "run.kind = girsanov needs dynamics.stationary = false");
  }
  if (run.kind == ExperimentKind::OuCheck) {
    require(!dynamics.stationary, "run.kind = ou-check needs dynamics.stationary = false");
  }
  if (run.kind == ExperimentKind::Malliavin) {
    require(dynamics.variant == Variant::Galerkin || dynamics.variant == Variant::Truncated,
            "run.kind = malliavin needs dynamics.variant = truncated or galerkin");
  }
  if (run.kind == ExperimentKind::SplittingRate) {
    require(dynamics.variant == Variant::Galerkin,
            "run.kind = splitting-rate needs dynamics.variant = galerkin (the split is applied "
            "per splitting.epsilons)");
    require(splitting.epsilons.size() >= 2, "splitting.epsilons needs at least two values");
    require(!splitting.modes.empty(), "splitting.modes must not be empty");
    for (double e : splitting.epsilons) {
      require(e > 0.0 && e < run.horizon,
              "splitting.epsilons entry " + number(e) + " must lie in (0, run.horizon = " +
                  number(run.horizon) + ")");
      require(aligned(e, run.dt), "splitting.epsilons entry " + number(e) +
                                      " is not an integer multiple of run.dt");
    }
  }
}

ExperimentConfig parse_config(const std::string& text) {
  std::map<std::string, std::map<std::string, const Field*>> index;
  for (const auto& f : fields()) index[f.section][f.key] = &f;

  ExperimentConfig cfg;
  std::set<std::string> assigned;
  std::string section;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    LineParser p(line, line_no);
    if (p.at_end()) continue;
    if (p.peek() == '[') {
      p.expect('[');
      const int col = p.column();
      section = p.identifier();
      if (!index.count(section)) throw ConfigError(line_no, col, "unknown section [" + section + "]");
      p.expect(']');
      if (!p.at_end()) p.error("unexpected text after section header");
      continue;
    }
    p.skip_space();
    const int key_col = p.column();
    const std::string key = p.identifier();
    if (section.empty()) throw ConfigError(line_no, key_col, "key '" + key + "' outside a section");
    const auto it = index[section].find(key);
    if (it == index[section].end()) {
      throw ConfigError(line_no, key_col, "unknown key '" + key + "' in [" + section + "]");
    }
    const std::string full = section + "." + key;
    if (!assigned.insert(full).second) {
      throw ConfigError(line_no, key_col, "duplicate key " + full);
    }
    p.expect('=');
    const Value v = p.value();
    if (!p.at_end()) p.error("unexpected text after value");
    it->second->set(cfg, v, full);
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& config) {
  std::string out;
  std::string section;
  for (const auto& f : fields()) {
    if (section != f.section) {
      if (!section.empty()) out += "\n";
      section = f.section;
      out += "[" + section + "]\n";
    }
    out += std::string(f.key) + " = " + f.get(config) + "\n";
  }
  return out;
}

}  // namespace snslab
