#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "snslab/density.hpp"
#include "snslab/girsanov.hpp"
#include "snslab/harness.hpp"
#include "snslab/malliavin.hpp"

namespace py = pybind11;
using namespace snslab;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
// Python holds bases through a non-const pointer; the library never mutates them.
using BasisHolder = std::shared_ptr<SpectralBasis>;

BasisHolder hold(const BasisPtr& b) { return std::const_pointer_cast<SpectralBasis>(b); }

Array to_array(std::span<const double> v) {
  Array out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

std::vector<double> to_vector(const Array& a) { return {a.data(), a.data() + a.size()}; }

/// Row-major n x d samples from a 1-d or 2-d array.
std::pair<std::vector<double>, std::size_t> samples_of(const Array& a) {
  if (a.ndim() == 1) return {to_vector(a), 1};
  if (a.ndim() != 2) throw InvalidArgument("samples must be a 1-d or 2-d array");
  return {to_vector(a), static_cast<std::size_t>(a.shape(1))};
}

Variant variant_of(const std::string& s) {
  for (Variant v : {Variant::Galerkin, Variant::Truncated, Variant::Split, Variant::DriftRemoved}) {
    if (to_string(v) == s) return v;
  }
  throw InvalidArgument("unknown variant '" + s + "'");
}

SplitMode split_mode_of(const std::string& s) {
  return s == to_string(SplitMode::StationaryCompensated) ? SplitMode::StationaryCompensated
                                                          : SplitMode::Plain;
}

py::dict result_dict(const ExperimentResult& r) {
  py::dict artifacts;
  for (const auto& a : r.artifacts) {
    if (a.name.ends_with(".bin")) {
      artifacts[py::str(a.name)] = py::bytes(a.contents);
    } else {
      artifacts[py::str(a.name)] = py::str(a.contents);
    }
  }
  py::list failures;
  for (const auto& f : r.failures) failures.append(py::make_tuple(f.index, f.message));
  py::dict d;
  d["kind"] = to_string(r.kind);
  d["pass"] = r.pass;
  d["exit_code"] = r.exit_code();
  d["artifacts"] = artifacts;
  d["summary"] = r.summary;
  d["failures"] = failures;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Spectral Galerkin stochastic Navier-Stokes laboratory";
  m.attr("__version__") = kArtifactVersion;

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);

  py::class_<SpectralBasis, BasisHolder>(m, "SpectralBasis")
      .def_property_readonly("cutoff", &SpectralBasis::cutoff)
      .def_property_readonly("size", &SpectralBasis::size)
      .def_property_readonly("eigenvalues",
                             [](const SpectralBasis& b) { return to_array(b.eigenvalues()); })
      .def("wavevector", [](const SpectralBasis& b, std::size_t i) { return b.mode(i).k; })
      .def("polarization", [](const SpectralBasis& b, std::size_t i) { return b.mode(i).direction; })
      .def("parity",
           [](const SpectralBasis& b, std::size_t i) {
             return b.mode(i).parity == Parity::Cos ? "cos" : "sin";
           })
      .def("prefix", [](const SpectralBasis& b, std::size_t n) { return hold(b.prefix(n)); },
           py::arg("n_modes"))
      .def("describe", &SpectralBasis::describe)
      .def("__len__", &SpectralBasis::size);
  m.def("build_basis", [](int cutoff) { return hold(build_basis(cutoff)); }, py::arg("cutoff"));

  py::class_<FourierState>(m, "FourierState")
      .def(py::init([](BasisHolder basis) { return FourierState(std::move(basis)); }),
           py::arg("basis"))
      .def(py::init([](BasisHolder basis, const Array& coeffs) {
             return FourierState(std::move(basis), to_vector(coeffs));
           }),
           py::arg("basis"), py::arg("coeffs"))
      .def_property_readonly("basis", [](const FourierState& s) { return hold(s.basis()); })
      .def_property_readonly("coeffs",
                             [](const FourierState& s) { return to_array(s.coeffs()); })
      .def("__len__", &FourierState::size)
      .def("__getitem__", [](const FourierState& s, std::size_t i) {
        if (i >= s.size()) throw py::index_error();
        return s[i];
      });

  m.def("inner_product", &inner_product, py::arg("u"), py::arg("v"));
  m.def("sobolev_norm", &sobolev_norm, py::arg("u"), py::arg("weight_exponent"));
  m.def("stokes_apply", &stokes_apply, py::arg("u"), py::arg("exponent"));
  m.def("semigroup_apply", &semigroup_apply, py::arg("u"), py::arg("t"), py::arg("viscosity"));
  m.def("bilinear", py::overload_cast<const FourierState&, const FourierState&>(&bilinear),
        py::arg("u"), py::arg("v"));
  m.def("truncated_bilinear",
        [](const FourierState& u, double R) { return truncated_bilinear(u, R); }, py::arg("u"),
        py::arg("R"));
  m.def("truncated_bilinear_derivative",
        [](const FourierState& u, const FourierState& d, double R) {
          return truncated_bilinear_derivative(u, d, R);
        },
        py::arg("u"), py::arg("direction"), py::arg("R"));

  py::class_<CovarianceSpec>(m, "CovarianceSpec")
      .def_static(
          "power_law",
          [](BasisHolder b, double alpha) { return CovarianceSpec::power_law(std::move(b), alpha); },
          py::arg("basis"), py::arg("alpha"))
      .def_static(
          "explicit_list",
          [](BasisHolder b, const Array& v) { return CovarianceSpec::explicit_list(std::move(b), to_vector(v)); },
          py::arg("basis"), py::arg("variances"))
      .def_property_readonly("variances",
                             [](const CovarianceSpec& c) { return to_array(c.variances()); })
      .def_property_readonly("trace", &CovarianceSpec::trace)
      .def("injective", &CovarianceSpec::injective);

  py::class_<DynamicsSpec>(m, "DynamicsSpec")
      .def(py::init<CovarianceSpec, double>(), py::arg("covariance"), py::arg("viscosity") = 1.0)
      .def_readwrite("viscosity", &DynamicsSpec::viscosity)
      .def_property(
          "variant", [](const DynamicsSpec& s) { return to_string(s.variant); },
          [](DynamicsSpec& s, const std::string& v) { s.variant = variant_of(v); })
      .def_readwrite("R", &DynamicsSpec::R)
      .def_readwrite("F", &DynamicsSpec::F)
      .def_readwrite("epsilon", &DynamicsSpec::epsilon)
      .def_property(
          "split_mode", [](const DynamicsSpec& s) { return to_string(s.split_mode); },
          [](DynamicsSpec& s, const std::string& v) { s.split_mode = split_mode_of(v); })
      .def_readwrite("nonlinear", &DynamicsSpec::nonlinear)
      .def_readonly("covariance", &DynamicsSpec::covariance)
      .def_property_readonly("basis", [](const DynamicsSpec& s) { return hold(s.basis()); });

  m.def(
      "step",
      [](const FourierState& u, const DynamicsSpec& spec, double t, double dt, const Array& dW) {
        return step(u, spec, t, dt, to_vector(dW));
      },
      py::arg("state"), py::arg("spec"), py::arg("t"), py::arg("dt"), py::arg("white_increment"));

  m.def(
      "run_trajectory",
      [](const FourierState& x, const DynamicsSpec& spec, double horizon, double dt,
         std::uint64_t seed, std::uint64_t trajectory, std::vector<double> snapshots,
         bool girsanov) {
        TrajectoryOptions o;
        o.snapshot_times = std::move(snapshots);
        o.track_girsanov = girsanov;
        TrajectoryRecord rec;
        {
          py::gil_scoped_release release;
          rec = run_trajectory(x, spec, horizon, dt, o, seed, trajectory);
        }
        const std::size_t n = x.size();
        Array states({static_cast<py::ssize_t>(rec.states.size()), static_cast<py::ssize_t>(n)});
        for (std::size_t i = 0; i < rec.states.size(); ++i) {
          std::copy(rec.states[i].coeffs().begin(), rec.states[i].coeffs().end(),
                    states.mutable_data() + i * n);
        }
        py::dict d;
        d["times"] = rec.times;
        d["states"] = states;
        d["tau_R"] = rec.tau_R;
        d["sup_energy"] = rec.sup_energy;
        if (girsanov) {
          std::vector<double> w;
          for (const auto& g : rec.girsanov) w.push_back(g.weight());
          d["girsanov_weight"] = w;
        }
        return d;
      },
      py::arg("x"), py::arg("spec"), py::arg("horizon"), py::arg("dt"), py::arg("seed"),
      py::arg("trajectory") = 0, py::arg("snapshots") = std::vector<double>{},
      py::arg("girsanov") = false);

  m.def(
      "ou_reference",
      [](const CovarianceSpec& cov, std::vector<std::size_t> F, double viscosity, double window,
         const FourierState* x) {
        const auto ref = OUReference::build(cov, std::move(F), viscosity, window, x);
        py::dict d;
        d["mean"] = ref.mean;
        d["Q"] = ref.Q;
        return d;
      },
      py::arg("covariance"), py::arg("F"), py::arg("viscosity"), py::arg("window"),
      py::arg("x") = nullptr);

  m.def(
      "malliavin_matrix",
      [](const FourierState& x, const DynamicsSpec& spec, double horizon, double dt,
         std::vector<std::size_t> F, std::uint64_t seed, std::uint64_t trajectory,
         std::size_t stride) {
        MalliavinMatrix M;
        {
          py::gil_scoped_release release;
          auto sys = make_malliavin_system(x, spec, horizon, dt, Functional::coordinates(F), seed,
                                           trajectory);
          sys.stride = stride;
          M = assemble_matrix(sys, sys.steps());
        }
        const auto d = static_cast<py::ssize_t>(M.dim());
        Array out({d, d});
        std::copy(M.entries().begin(), M.entries().end(), out.mutable_data());
        return out;
      },
      py::arg("x"), py::arg("spec"), py::arg("horizon"), py::arg("dt"), py::arg("F"),
      py::arg("seed"), py::arg("trajectory") = 0, py::arg("stride") = 1);

  m.def("predicted_exponent", &predicted_exponent, py::arg("alpha"), py::arg("n"),
        py::arg("stationary") = false);

  m.def(
      "weak_exponent_experiment",
      [](const Array& samples, double alpha, int n, bool stationary, std::vector<double> h,
         double max_omega) {
        const auto [x, d] = samples_of(samples);
        WeakExperimentOptions o;
        o.alpha = alpha;
        o.n = n;
        o.stationary = stationary;
        o.h_magnitudes = std::move(h);
        o.max_omega = max_omega;
        BesovReport r;
        {
          py::gil_scoped_release release;
          r = weak_exponent_experiment(x, d, o);
        }
        py::dict out;
        out["alpha_n_predicted"] = r.alpha_n_predicted;
        out["slope"] = r.envelope_fit.slope;
        out["valid"] = r.envelope_fit.valid;
        out["h"] = r.envelope_h;
        out["envelope"] = r.envelope;
        out["verdict"] = to_string(r.verdict);
        out["estimates_csv"] = r.estimates_csv();
        return out;
      },
      py::arg("samples"), py::arg("alpha") = 0.5, py::arg("n") = 2, py::arg("stationary") = false,
      py::arg("h") = std::vector<double>{0.5, 0.25, 0.125, 0.0625, 0.03125},
      py::arg("max_omega") = 64.0);

  m.def(
      "histogram_density",
      [](const Array& samples, std::vector<double> lo, std::vector<double> hi,
         std::vector<std::size_t> cells) {
        const auto [x, d] = samples_of(samples);
        if (lo.size() != d) throw InvalidArgument("box dimension does not match the samples");
        const auto e = estimate_density(x, GridGeometry(std::move(lo), std::move(hi), cells));
        std::vector<py::ssize_t> shape(cells.begin(), cells.end());
        Array values(shape);
        std::copy(e.density.values.begin(), e.density.values.end(), values.mutable_data());
        py::dict out;
        out["density"] = values;
        out["total_mass"] = e.total_mass;
        out["max_cell_mass"] = e.max_cell_mass;
        out["atom_like"] = e.atom_like;
        return out;
      },
      py::arg("samples"), py::arg("lo"), py::arg("hi"), py::arg("cells"));

  m.def(
      "parse_config", [](const std::string& text) { return serialize_config(parse_config(text)); },
      py::arg("text"), "Validates a config and returns it with every default filled in.");
  m.def("default_config", [] { return serialize_config(ExperimentConfig{}); });
  m.def(
      "compute_experiment",
      [](const std::string& text) {
        const auto cfg = parse_config(text);
        ExperimentResult r;
        {
          py::gil_scoped_release release;
          r = compute_experiment(cfg);
        }
        return result_dict(r);
      },
      py::arg("config_text"), "Runs an experiment in memory and returns its tables.");
  m.def(
      "run_experiment",
      [](const std::string& text) {
        const auto cfg = parse_config(text);
        RunOutcome out;
        {
          py::gil_scoped_release release;
          out = run_experiment(cfg);
        }
        py::dict d = result_dict(out.result);
        d["exit_code"] = out.exit_code;
        d["out_dir"] = out.out_dir.string();
        d["error"] = out.error;
        return d;
      },
      py::arg("config_text"), "Runs an experiment and writes its outputs to run.out.");
}
