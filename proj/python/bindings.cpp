#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "jmgt/checkpoint.hpp"
#include "jmgt/experiments.hpp"

namespace py = pybind11;
using namespace jmgt;

namespace {

template <class T, class F>
py::array_t<double> column(const std::vector<T>& rows, F f) {
    py::array_t<double> out(static_cast<py::ssize_t>(rows.size()));
    auto a = out.mutable_unchecked<1>();
    for (std::size_t i = 0; i < rows.size(); ++i) a(static_cast<py::ssize_t>(i)) = f(rows[i]);
    return out;
}

py::array_t<double> to_samples(const SpectralField& f) {
    auto x = inverse_transform(f);
    std::vector<py::ssize_t> shape(static_cast<std::size_t>(f.grid->dim()), f.grid->points());
    py::array_t<double> out(shape);
    std::copy(x.begin(), x.end(), out.mutable_data());
    return out;
}

GridPtr grid_for(const py::array_t<double, py::array::c_style | py::array::forcecast>& x, double box_length) {
    const int dim = static_cast<int>(x.ndim());
    for (int a = 1; a < dim; ++a)
        if (x.shape(a) != x.shape(0)) throw std::invalid_argument("samples must have equal extent on every axis");
    return make_grid(dim, static_cast<int>(x.shape(0)), box_length);
}

std::vector<double> flat(const py::array_t<double, py::array::c_style | py::array::forcecast>& x) {
    return {x.data(), x.data() + x.size()};
}

}  // namespace

PYBIND11_MODULE(_jmgt, m) {
    m.doc() = "JMGT simulator core";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ParamError>(m, "ParamError", PyExc_ValueError);
    py::register_exception<CheckpointError>(m, "CheckpointError", PyExc_IOError);

    py::class_<PhysicalParams>(m, "Params")
        .def_readonly("tau", &PhysicalParams::tau)
        .def_readonly("alpha", &PhysicalParams::alpha)
        .def_readonly("c", &PhysicalParams::c)
        .def_readonly("delta", &PhysicalParams::delta)
        .def_readonly("b", &PhysicalParams::b)
        .def_readonly("k", &PhysicalParams::k)
        .def_property_readonly("c_g2", &PhysicalParams::c_g2)
        .def_property_readonly("mass", &PhysicalParams::mass);
    m.def("make_params", &make_params, py::arg("tau"), py::arg("c"), py::arg("delta"), py::arg("k"), py::arg("m"),
          py::arg("tau_k"), py::arg("alpha") = 1.0, py::arg("allow_non_subcritical") = false, py::arg("zeta") = 0.0,
          py::arg("rho") = 1.0);

    py::class_<RunSpec>(m, "RunSpec")
        .def("dump", [](const RunSpec& s) { return dump_config(s); })
        .def("params", &RunSpec::params)
        .def_property(
            "out_dir", [](const RunSpec& s) { return s.output.directory; },
            [](RunSpec& s, const std::string& d) { s.output.directory = d; });
    m.def("parse_config", &parse_config, py::arg("text"));
    m.def("load_config", &load_config, py::arg("path"));

    m.def(
        "run_command",
        [](const std::string& command, const RunSpec& spec) {
            CommandResult r;
            {
                py::gil_scoped_release nogil;
                r = run_command(command, spec);
            }
            return py::make_tuple(r.exit_code, r.message, r.outputs);
        },
        py::arg("command"), py::arg("spec"), "Run a CLI command; returns (exit_code, message, outputs).");

    m.def(
        "simulate",
        [](const RunSpec& spec) {
            SimulationRecord rec;
            {
                py::gil_scoped_release nogil;
                PhysicalParams p = spec.params();
                rec = run_simulation(initial_state_for(spec, p), p, spec.solver(), nullptr, false);
            }
            py::dict d;
            const auto& s = rec.series;
            d["t"] = column(s, [](const EnergyReport& r) { return r.t; });
            d["E1"] = column(s, [](const EnergyReport& r) { return r.E1; });
            d["E2"] = column(s, [](const EnergyReport& r) { return r.E2; });
            d["scriptE1"] = column(s, [](const EnergyReport& r) { return r.scriptE1; });
            d["scriptE2"] = column(s, [](const EnergyReport& r) { return r.scriptE2; });
            d["D_cum"] = column(s, [](const EnergyReport& r) { return r.dissipation_D_cum; });
            d["blew_up"] = rec.result.blew_up;
            d["message"] = rec.result.message;
            d["psi"] = to_samples(rec.result.final_state.psi);
            return d;
        },
        py::arg("spec"), "Energy time series and final psi samples of a simulate run.");

    m.def(
        "symbol_decay",
        [](const RunSpec& spec) {
            SymbolOutcome o;
            {
                py::gil_scoped_release nogil;
                o = run_symbol(spec);
            }
            py::dict d;
            d["t"] = column(o.rows, [](const RadialNorms& r) { return r.t; });
            d["U"] = column(o.rows, [](const RadialNorms& r) { return r.normU_j0; });
            d["gradU"] = column(o.rows, [](const RadialNorms& r) { return r.normU_j1; });
            d["w"] = column(o.rows, [](const RadialNorms& r) { return r.normW; });
            d["v"] = column(o.rows, [](const RadialNorms& r) { return r.normV; });
            py::dict slopes;
            for (const auto& f : o.fits) slopes[py::str(f.series_id)] = f.slope;
            d["slopes"] = slopes;
            return d;
        },
        py::arg("spec"));

    m.def("mode_spectral_rate", &mode_spectral_rate, py::arg("xi"), py::arg("params"));
    m.def(
        "measure_mode_rate", [](double xi, const PhysicalParams& p) { return measure_mode_rate(xi, p).lambda_eff; },
        py::arg("xi"), py::arg("params"));
    m.def("radial_integral", &radial_integral, py::arg("n"), py::arg("t"));

    m.def(
        "laplacian",
        [](py::array_t<double, py::array::c_style | py::array::forcecast> x, double box_length) {
            GridPtr g = grid_for(x, box_length);
            return to_samples(apply_laplacian(forward_transform(g, flat(x))));
        },
        py::arg("samples"), py::arg("box_length"), "Spectral Laplacian of periodic samples on a cube.");

    m.def(
        "read_checkpoint",
        [](const std::string& path) {
            Checkpoint c = read_checkpoint(path);
            py::dict d;
            d["t"] = c.state.t;
            d["steps"] = c.state.step_count;
            d["psi"] = to_samples(c.state.psi);
            d["v"] = to_samples(c.state.v);
            d["w"] = to_samples(c.state.w);
            d["params"] = c.params;
            return d;
        },
        py::arg("path"));
}
