#include <sstream>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fluctuon/analysis.hpp"
#include "fluctuon/coefficients.hpp"
#include "fluctuon/config.hpp"
#include "fluctuon/dk_solver.hpp"
#include "fluctuon/error.hpp"
#include "fluctuon/experiments.hpp"
#include "fluctuon/noise.hpp"
#include "fluctuon/run.hpp"

namespace py = pybind11;
using namespace fluctuon;

namespace {

py::array_t<double> to_array(std::span<const double> v) {
  py::array_t<double> a(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), a.mutable_data());
  return a;
}

GridField from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& a, int dim) {
  const auto n = static_cast<std::size_t>(a.size());
  int res = dim == 1 ? static_cast<int>(n) : static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
  GridField f(dim, res);
  if (f.size() != n) throw InvalidArgument("array size is not N^d");
  std::copy(a.data(), a.data() + n, f.values().begin());
  return f;
}

py::dict schedule_row(const ScheduleRow& r) {
  py::dict d;
  d["epsilon"] = r.epsilon;
  d["M"] = r.cutoff;
  d["F1"] = r.f1;
  d["F2"] = r.f2;
  d["F3"] = r.f3;
  d["regime"] = r.regime;
  d["envelope"] = r.envelope;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Dean-Kawasaki fluctuation laboratory (C++ core)";

  auto base = py::register_exception<Error>(m, "Error");
  auto invalid = py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
  py::register_exception<ResolutionTooSmall>(m, "ResolutionTooSmall", invalid.ptr());
  py::register_exception<GridMismatch>(m, "GridMismatch", invalid.ptr());
  py::register_exception<RegimeViolation>(m, "RegimeViolation", invalid.ptr());
  py::register_exception<QuadratureError>(m, "QuadratureError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<ReportMismatch>(m, "ReportMismatch", base.ptr());

  py::class_<Exponents>(m, "Exponents")
      .def_readonly("m", &Exponents::m)
      .def_readonly("p", &Exponents::p)
      .def_readonly("k", &Exponents::k)
      .def_readonly("g", &Exponents::g)
      .def_readonly("theta", &Exponents::theta);

  py::class_<Coefficients>(m, "Coefficients")
      .def_readonly("name", &Coefficients::name)
      .def_readonly("exponents", &Coefficients::exponents)
      .def("phi", [](const Coefficients& c, double z) { return c.phi(z); })
      .def("dphi", [](const Coefficients& c, double z) { return c.dphi(z); })
      .def("sigma", [](const Coefficients& c, double z) { return c.sigma(z); })
      .def("dsigma", [](const Coefficients& c, double z) { return c.dsigma(z); });

  m.def("model_case", &model_case, py::arg("m"));
  m.def("linear_case", &linear_case);
  m.def(
      "smooth_near_zero",
      [](const Coefficients& c, double eta, double z_ref) { return smooth_near_zero(c, eta, z_ref).smoothed; },
      py::arg("c"), py::arg("eta"), py::arg("z_ref") = 1.0);
  m.def(
      "theta_phi_q", &theta_phi_q, py::arg("c"), py::arg("q"), py::arg("z"));
  m.def(
      "validate_assumptions",
      [](const Coefficients& c, double z_max, int samples) {
        const ValidationReport r = validate_assumptions(c, z_max, samples);
        py::list checks;
        for (const auto& ch : r.checks) {
          py::dict d;
          d["id"] = ch.id;
          d["status"] = to_string(ch.status);
          d["constant"] = ch.constant;
          d["witness"] = ch.witness;
          d["note"] = ch.note;
          checks.append(d);
        }
        py::dict out;
        out["all_pass"] = r.all_pass();
        out["checks"] = checks;
        return out;
      },
      py::arg("c"), py::arg("z_max") = 1e4, py::arg("samples") = 400);

  m.def(
      "structure_sums",
      [](int dim, int cutoff, int resolution) {
        const StructureSums s = structure_sums(build_basis(dim, cutoff, resolution));
        py::dict d;
        d["f1"] = to_array(s.f1.values());
        d["f3"] = to_array(s.f3.values());
        d["f1_sup"] = s.f1_sup;
        d["f2_sup"] = s.f2_sup;
        d["f3_sup"] = s.f3_sup;
        return d;
      },
      py::arg("dim"), py::arg("cutoff"), py::arg("resolution"));
  m.def("f3_closed_form_1d", &f3_closed_form_1d, py::arg("cutoff"));

  m.def(
      "make_schedule",
      [](std::vector<double> eps, double gamma, int dim) {
        py::list rows;
        for (const auto& r : make_schedule(std::move(eps), gamma, dim).rows) rows.append(schedule_row(r));
        return rows;
      },
      py::arg("epsilons"), py::arg("gamma"), py::arg("dim") = 1);

  m.def(
      "simulate_path",
      [](const Coefficients& c, int dim, int resolution, double horizon, double epsilon, int cutoff, double rho0,
         std::uint64_t seed, std::uint64_t path, std::vector<double> snapshot_times, double dt) {
        SolverConfig cfg;
        cfg.dim = dim;
        cfg.resolution = resolution;
        cfg.horizon = horizon;
        cfg.epsilon = epsilon;
        cfg.rho0 = rho0;
        cfg.dt = dt;
        cfg.snapshot_times = std::move(snapshot_times);
        Trajectory t;
        {
          py::gil_scoped_release release;
          t = simulate_path(cfg, c, build_basis(dim, cutoff, resolution), seed, path);
        }
        const auto cells = static_cast<py::ssize_t>(cell_count(dim, resolution));
        py::array_t<double> snaps({static_cast<py::ssize_t>(t.snapshots.size()), cells});
        auto* out = snaps.mutable_data();
        for (const auto& f : t.snapshots) out = std::copy(f.values().begin(), f.values().end(), out);
        py::dict d;
        d["times"] = t.times;
        d["snapshots"] = snaps;
        d["dt"] = t.diagnostics.dt;
        d["steps"] = t.diagnostics.steps;
        d["max_rel_mass_drift"] = t.diagnostics.max_rel_mass_drift;
        d["min_rho"] = t.diagnostics.min_rho;
        d["negativity_events"] = t.diagnostics.negativity_events;
        d["rejected"] = t.diagnostics.rejected;
        return d;
      },
      py::arg("c"), py::arg("dim") = 1, py::arg("resolution") = 128, py::arg("horizon") = 0.25,
      py::arg("epsilon") = 0.0, py::arg("cutoff") = 2, py::arg("rho0") = 1.0, py::arg("seed") = 1,
      py::arg("path") = 0, py::arg("snapshot_times") = std::vector<double>{}, py::arg("dt") = 0.0);

  m.def(
      "dft",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a, int dim) {
        const SpectralField s = dft(from_array(a, dim));
        py::array_t<Complex> out(static_cast<py::ssize_t>(s.size()));
        std::copy(s.coefficients().begin(), s.coefficients().end(), out.mutable_data());
        return out;
      },
      py::arg("values"), py::arg("dim") = 1);
  m.def(
      "h_neg_norm",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a, double beta, int dim) {
        return h_neg_norm(dft(from_array(a, dim)), beta);
      },
      py::arg("values"), py::arg("beta"), py::arg("dim") = 1);

  m.def("moser_remainder", &moser_remainder, py::arg("c0"), py::arg("inf_dphi"), py::arg("epsilon"), py::arg("f1"),
        py::arg("f3"));
  m.def(
      "moser_series",
      [](double log_r, int dim) {
        const MoserSeries s = moser_series_log(log_r, dim);
        py::dict d;
        d["value"] = s.value;
        d["terms"] = s.terms;
        d["zeta"] = s.zeta;
        d["partial_sums"] = s.partial_sums;
        return d;
      },
      py::arg("log_r"), py::arg("dim") = 1);

  py::class_<RunConfig>(m, "RunConfig")
      .def("serialize", &serialize_config)
      .def("hash", &config_hash_hex)
      .def_readonly("command", &RunConfig::command)
      .def_readonly("seed", &RunConfig::seed)
      .def_readonly("paths", &RunConfig::paths);
  m.def("parse_config", &parse_config_text, py::arg("text"), py::arg("overrides") = std::vector<std::string>{});
  m.def(
      "run",
      [](const RunConfig& cfg) {
        std::ostringstream summary;
        RunResult r;
        {
          py::gil_scoped_release release;
          r = run(cfg, summary);
        }
        std::vector<std::string> files;
        for (const auto& f : r.files) files.push_back(f.string());
        py::dict d;
        d["exit_code"] = r.exit_code;
        d["files"] = files;
        d["summary"] = summary.str();
        return d;
      },
      py::arg("config"));
}
