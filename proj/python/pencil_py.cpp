#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "pencil/adjoint_solver.hpp"
#include "pencil/errors.hpp"
#include "pencil/io.hpp"
#include "pencil/oracle.hpp"
#include "pencil/scattering.hpp"
#include "pencil/spectral.hpp"

namespace py = pybind11;
using namespace pencil;

namespace {

PotentialCoefficients make_potential(int m, const std::vector<std::tuple<int, int, int, cplx>>& entries) {
  std::vector<CoefficientEntry> es;
  for (const auto& [g, s, n, v] : entries) es.push_back({g, s, n, v});
  return build_potential(m, es);
}

py::dict table_dict(const PotentialCoefficients& p) {
  py::dict d;
  for (const auto& [key, v] : p.table()) d[py::make_tuple(key.gamma, key.s, key.n)] = v;
  return d;
}

py::dict normalizer_dict(const ScatteringData& data) {
  py::dict d;
  for (const auto& [key, v] : data.normalizers()) d[py::make_tuple(key.n, key.j, key.v)] = v;
  return d;
}

}  // namespace

PYBIND11_MODULE(_pencil, mod) {
  mod.doc() = "Operator pencil series, spectra and inverse reconstruction";

  static py::exception<PencilError> base(mod, "PencilError");
  static py::exception<ConfigError> config_error(mod, "ConfigError", base.ptr());
  static py::exception<InconsistentData> inconsistent(mod, "InconsistentData", base.ptr());
  static py::exception<PencilError> compute_error(mod, "ComputeError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      PyErr_SetString(config_error.ptr(), e.what());
    } catch (const InconsistentData& e) {
      PyErr_SetString(inconsistent.ptr(), e.what());
    } catch (const PencilError& e) {
      PyErr_SetString(compute_error.ptr(), e.what());
    }
  });

  mod.def("omega", &omega, py::arg("m"), py::arg("j"));
  mod.def("pole_k", &pole_k, py::arg("m"), py::arg("n"), py::arg("j"), py::arg("tau"));
  mod.def("coefficient_slots", &coefficient_slots, py::arg("m"));

  py::class_<PotentialCoefficients>(mod, "PotentialCoefficients")
      .def(py::init([](int m) { return PotentialCoefficients(PencilOrder(m)); }), py::arg("m"))
      .def_property_readonly("m", &PotentialCoefficients::m)
      .def_property_readonly("max_harmonic", &PotentialCoefficients::max_harmonic)
      .def_property_readonly("weighted_norm", &PotentialCoefficients::weighted_norm)
      .def_property_readonly("table", &table_dict)
      .def("at", &PotentialCoefficients::at, py::arg("gamma"), py::arg("s"), py::arg("n"))
      .def("eval_coefficient", &PotentialCoefficients::eval_coefficient, py::arg("gamma"), py::arg("x"), py::arg("k"))
      .def("scaled", &PotentialCoefficients::scaled, py::arg("factor"))
      .def("to_json", [](const PotentialCoefficients& p) { return io::to_json(p).dump(); })
      .def("__eq__", [](const PotentialCoefficients& a, const PotentialCoefficients& b) { return a == b; });

  mod.def("build_potential", &make_potential, py::arg("m"), py::arg("entries"),
          "entries: list of (gamma, s, n, value)");
  mod.def(
      "potential_from_json", [](const std::string& text) { return io::parse_potential(io::json::parse(text)); },
      py::arg("text"));

  py::class_<SeriesTable, std::shared_ptr<SeriesTable>>(mod, "SeriesTable")
      .def_property_readonly("m", &SeriesTable::m)
      .def_property_readonly("truncation", &SeriesTable::truncation)
      .def("constant", &SeriesTable::constant, py::arg("tau"), py::arg("alpha"))
      .def("pole", &SeriesTable::pole, py::arg("tau"), py::arg("n"), py::arg("j"), py::arg("alpha"))
      .def("evaluate", &SeriesTable::evaluate, py::arg("tau"), py::arg("x"), py::arg("k"), py::arg("d") = 0)
      .def("residue", &SeriesTable::residue, py::arg("tau"), py::arg("n"), py::arg("j"), py::arg("x"),
           py::arg("d") = 0)
      .def("to_json", [](const SeriesTable& t) { return io::to_json(t).dump(); });
  py::class_<SolutionCoefficients, SeriesTable, std::shared_ptr<SolutionCoefficients>>(mod, "SolutionCoefficients");
  py::class_<AdjointCoefficients, SeriesTable, std::shared_ptr<AdjointCoefficients>>(mod, "AdjointCoefficients");

  mod.def(
      "solve_coefficients",
      [](const PotentialCoefficients& p, int a) { return std::make_shared<SolutionCoefficients>(solve_coefficients(p, a)); },
      py::arg("potential"), py::arg("truncation") = kDefaultTruncation);
  mod.def("solve_adjoint_coefficients", &solve_adjoint_coefficients, py::arg("potential"),
          py::arg("truncation") = kDefaultTruncation);
  mod.def(
      "tail_ratio", [](const SeriesTable& t) { return series_diagnostics(t).tail_ratio; }, py::arg("table"));

  mod.def("sector_count", &sector_count, py::arg("m"));
  mod.def(
      "sector_ordering",
      [](int m, cplx k) {
        const auto c = sector_ordering(m, k);
        py::dict d;
        d["sector"] = c.sector;
        d["order"] = c.order;
        d["decaying"] = c.decaying;
        d["growing"] = c.growing;
        return d;
      },
      py::arg("m"), py::arg("k"));
  mod.def(
      "wronskian", [](const SolutionCoefficients& v, cplx k) { return wronskian(v, k); }, py::arg("v"), py::arg("k"));
  mod.def(
      "find_eigenvalues",
      [](const SolutionCoefficients& v, int sector, double r_min, double r_max, unsigned seed) {
        SpectrumOptions opt;
        opt.seed = seed;
        const auto r = find_eigenvalues(v, sector, r_min, r_max, opt);
        py::list out;
        for (const auto& e : r.eigenvalues) out.append(py::make_tuple(e.k, e.residual, e.multiplicity));
        return out;
      },
      py::arg("v"), py::arg("sector"), py::arg("r_min"), py::arg("r_max"), py::arg("seed") = 1u,
      "list of (k, residual, multiplicity)");
  mod.def("resolvent_kernel", &resolvent_kernel, py::arg("v"), py::arg("r"), py::arg("k"), py::arg("x"),
          py::arg("t"), py::arg("d") = 0);

  py::class_<ScatteringData>(mod, "ScatteringData")
      .def_property_readonly("m", &ScatteringData::m)
      .def_property_readonly("max_harmonic", &ScatteringData::max_harmonic)
      .def_property_readonly("normalizers", &normalizer_dict)
      .def("S", py::overload_cast<int, int, int, cplx>(&ScatteringData::S, py::const_), py::arg("sector"),
           py::arg("d"), py::arg("g"), py::arg("k"))
      .def("S_inverse", py::overload_cast<int, int, int, cplx>(&ScatteringData::S_inverse, py::const_),
           py::arg("sector"), py::arg("d"), py::arg("g"), py::arg("k"))
      .def("to_json", [](const ScatteringData& d) { return io::normalizers_to_json(d).dump(); });
  mod.def(
      "scattering_data",
      [](std::shared_ptr<SolutionCoefficients> v, int max_harmonic, bool extract) {
        auto data = scattering_matrix(v, 0, max_harmonic);
        return extract ? extract_normalizers(std::move(data)) : data;
      },
      py::arg("v"), py::arg("max_harmonic"), py::arg("extract") = true);
  mod.def(
      "normalizers_from_json", [](const std::string& text) { return io::parse_normalizers(io::json::parse(text)); },
      py::arg("text"));

  py::class_<ReconstructionReport>(mod, "ReconstructionReport")
      .def_readonly("recovered", &ReconstructionReport::recovered)
      .def_readonly("max_error", &ReconstructionReport::max_error)
      .def_property_readonly("level_residuals",
                             [](const ReconstructionReport& r) {
                               std::vector<double> out;
                               for (const auto& l : r.levels) out.push_back(l.relative);
                               return out;
                             })
      .def_property_readonly("held_out",
                             [](const ReconstructionReport& r) {
                               std::vector<double> out;
                               for (const auto& h : r.held_out) out.push_back(h.residual);
                               return out;
                             })
      .def("to_json", [](const ReconstructionReport& r) { return io::to_json(r).dump(); });
  mod.def(
      "reconstruct", [](const ScatteringData& d, int a) { return reconstruct(d, a); }, py::arg("data"),
      py::arg("truncation") = kDefaultTruncation);
  mod.def(
      "roundtrip", [](const PotentialCoefficients& p, int a) { return roundtrip(p, a); }, py::arg("potential"),
      py::arg("truncation") = kDefaultTruncation);

  mod.def(
      "series_residual",
      [](const PotentialCoefficients& p, const SolutionCoefficients& v, int tau, double x, cplx k) {
        return oracle::residual_l(p, [&](double xx, int d) { return v.evaluate(tau, xx, k, d); }, x, k);
      },
      py::arg("potential"), py::arg("v"), py::arg("tau"), py::arg("x"), py::arg("k"));
  mod.def(
      "integrate_ode",
      [](const PotentialCoefficients& p, cplx k, int tau, std::vector<double> grid, double x_far, double rtol) {
        oracle::OdeOptions opt;
        opt.x_far = x_far;
        opt.rtol = rtol;
        return oracle::integrate_ode(p, k, tau, std::move(grid), opt).values;
      },
      py::arg("potential"), py::arg("k"), py::arg("tau"), py::arg("grid"), py::arg("x_far") = 30.0,
      py::arg("rtol") = 1e-9, "values[d][i] for derivatives d = 0..2m-1");
}
