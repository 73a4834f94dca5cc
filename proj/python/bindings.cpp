#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "ashjb/boundary_values.hpp"
#include "ashjb/cli.hpp"
#include "ashjb/credible_band.hpp"
#include "ashjb/errors.hpp"
#include "ashjb/hjb.hpp"
#include "ashjb/principal.hpp"
#include "ashjb/screening.hpp"

namespace py = pybind11;
using namespace ashjb;

namespace {

/// Interior and screening solves on one grid.
struct Solution {
    ModelSpec spec;
    GridSpec grid;
    InteriorSolution interior;
    ScreeningSolution screening;

    py::array_t<double> values() const {
        const ValueField& f = interior.field;
        py::array_t<double> a({f.n_time(), f.n_gap(), f.n_belief()});
        std::copy(f.values.begin(), f.values.end(), a.mutable_data());
        return a;
    }
};

Solution solve(const ModelSpec& spec, const GridSpec& grid) {
    Solution s{spec, grid, {}, {}};
    py::gil_scoped_release release;
    const BoundaryValues bv = make_boundary_values(spec, grid);
    s.interior = solve_interior(spec, grid, bv);
    s.screening = solve_screening(spec, grid, bv);
    return s;
}

py::dict optimum(const GapOptimum& g) {
    py::dict d;
    d["value"] = g.value;
    d["y0"] = g.y0;
    d["y1"] = g.y1;
    d["gap"] = g.gap;
    d["plateau_width"] = g.plateau_width;
    return d;
}

py::dict run_config(const std::string& json_text, const std::vector<std::string>& overrides) {
    const RunConfig rc = parse_config(json_text, overrides);
    std::ostringstream log;
    RunResult r;
    {
        py::gil_scoped_release release;
        r = run(rc, log);
    }
    py::dict d;
    d["exit_code"] = r.exit_code;
    d["outputs"] = r.outputs;
    d["message"] = r.message;
    d["log"] = log.str();
    py::dict checks;
    for (const auto& c : r.checks) checks[py::str(c.name)] = c.pass;
    d["checks"] = checks;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Gap-belief HJB solver core";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<SolverError>(m, "SolverError", base.ptr());

    py::class_<ModelSpec>(m, "ModelSpec")
        .def_static("dominated", &ModelSpec::dominated, py::arg("a_upper") = 1.0, py::arg("kappa") = 0.1,
                    py::arg("horizon_T") = 2.0)
        .def_static("nondominated", &ModelSpec::nondominated, py::arg("a_upper") = 1.0, py::arg("a_lower") = -1.0,
                    py::arg("kappa") = 0.1, py::arg("horizon_T") = 2.0)
        .def_readwrite("kappa", &ModelSpec::kappa)
        .def_readwrite("horizon_T", &ModelSpec::horizon_T)
        .def_readonly("action_min", &ModelSpec::action_min)
        .def_readonly("action_max", &ModelSpec::action_max)
        .def_readwrite("r_pooled", &ModelSpec::r_pooled)
        .def_readwrite("r_type", &ModelSpec::r_type)
        .def_readwrite("prior_p0", &ModelSpec::prior_p0)
        .def_property_readonly("cost_kind", [](const ModelSpec& s) { return to_string(s.cost_kind); })
        .def("validate", &ModelSpec::validate);

    py::class_<GridSpec>(m, "GridSpec")
        .def(py::init<>())
        .def(py::init([](int nt, int ng, int nb, int nc) {
                 GridSpec g;
                 g.n_time = nt;
                 g.n_gap = ng;
                 g.n_belief = nb;
                 g.n_control = nc;
                 return g;
             }),
             py::arg("n_time"), py::arg("n_gap"), py::arg("n_belief"), py::arg("n_control") = 41)
        .def_readwrite("n_time", &GridSpec::n_time)
        .def_readwrite("n_gap", &GridSpec::n_gap)
        .def_readwrite("n_belief", &GridSpec::n_belief)
        .def_readwrite("control_trunc_K", &GridSpec::control_trunc_K)
        .def_readwrite("n_control", &GridSpec::n_control)
        .def_readwrite("refine_iters", &GridSpec::refine_iters)
        .def_readwrite("terminal_layer_eps", &GridSpec::terminal_layer_eps)
        .def_readwrite("cfl_safety", &GridSpec::cfl_safety);

    m.def("extremal_gaps", &extremal_gaps, py::arg("spec"));
    m.def("band", py::overload_cast<const ModelSpec&, double>(&band), py::arg("spec"), py::arg("t"));
    m.def("boundary_closed_form", &boundary_closed_form, py::arg("spec"), py::arg("t"));
    m.def("structural_constants", [](const ModelSpec& s) {
        const StructuralConstants k = structural_constants(s);
        py::dict d;
        d["C0"] = saturation_threshold(s);
        d["N0"] = k.n0;
        d["C"] = k.growth;
        d["rho"] = k.rho;
        return d;
    });

    py::class_<Solution>(m, "Solution")
        .def_property_readonly("values", &Solution::values)
        .def_property_readonly("runtime_seconds", [](const Solution& s) { return s.interior.runtime_seconds; })
        .def("value_sc",
             [](const Solution& s, double y0, double y1, double p) {
                 return value_sc(s.interior.field, 0.0, 0.0, y0, y1, p);
             },
             py::arg("y0"), py::arg("y1"), py::arg("p"))
        .def("v_conditional", [](const Solution& s, double p0) { return optimum(v_conditional(s.spec, s.interior.field, p0)); })
        .def("v_unconditional",
             [](const Solution& s, double p0) { return optimum(v_unconditional(s.spec, s.interior.field, p0)); })
        .def("v_screening", [](const Solution& s, double p0) {
            const ScreeningReport r = v_screening(s.spec, s.screening, p0);
            py::dict d;
            d["value"] = r.value;
            d["argmax"] = r.argmax_quad;
            return d;
        });

    m.def("solve", &solve, py::arg("spec"), py::arg("grid"));
    m.def("run", &run_config, py::arg("config_json"), py::arg("overrides") = std::vector<std::string>{},
          "Run the pipeline from a JSON configuration; returns exit code, outputs and check flags.");
}
