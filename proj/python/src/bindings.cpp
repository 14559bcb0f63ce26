// SPDX-License-Identifier: Apache-2.0

#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "urllc/benchmarks.hpp"
#include "urllc/experiment.hpp"
#include "urllc/fbl.hpp"
#include "urllc/instance_io.hpp"
#include "urllc/sca.hpp"

namespace py = pybind11;
using namespace urllc;

namespace {

py::array_t<double> to_array(const Grid3& g) {
    const Dims d = g.dims();
    py::array_t<double> out({d.users, d.subcarriers, d.slots});
    std::copy(g.values().begin(), g.values().end(), out.mutable_data());
    return out;
}

Grid3 from_array(Dims d, const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 3 || a.shape(0) != d.users || a.shape(1) != d.subcarriers || a.shape(2) != d.slots)
        throw py::value_error("array shape must be (users, subcarriers, slots)");
    Grid3 g(d);
    std::copy(a.data(), a.data() + g.size(), g.values().begin());
    return g;
}

RoundingRule parse_rounding(const std::string& name) {
    if (name == "argmax_repair") return RoundingRule::argmax_repair;
    if (name == "threshold") return RoundingRule::threshold;
    throw py::value_error("rounding must be argmax_repair or threshold");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Finite-blocklength URLLC-OFDMA resource allocation";

    auto fbl = m.def_submodule("fbl");
    fbl.def("q_func", &fbl::q_func);
    fbl.def("q_inv", &fbl::q_inv);
    fbl.def("dispersion", &fbl::dispersion);
    fbl.def("normal_approx_bits",
            [](const std::vector<double>& snrs, double eps) { return fbl::normal_approx_bits(snrs, eps); },
            py::arg("snrs"), py::arg("eps"));
    fbl.def(
        "user_bits",
        [](const std::vector<double>& gains, const std::vector<double>& power, double eps) {
            const auto u = fbl::user_bits(gains, power, eps);
            return py::make_tuple(u.capacity_bits, u.dispersion_bits, u.psi);
        },
        py::arg("gains"), py::arg("power"), py::arg("eps"));
    fbl.def("vbar_element_d1", &fbl::vbar_element_d1);
    fbl.def("vbar_element_d2", &fbl::vbar_element_d2);

    py::class_<Dims>(m, "Dims")
        .def(py::init([](int k, int mm, int n) { return Dims{k, mm, n}; }), py::arg("users"),
             py::arg("subcarriers"), py::arg("slots"))
        .def_readwrite("users", &Dims::users)
        .def_readwrite("subcarriers", &Dims::subcarriers)
        .def_readwrite("slots", &Dims::slots)
        .def("__repr__", [](const Dims& d) {
            return "Dims(" + std::to_string(d.users) + ", " + std::to_string(d.subcarriers) + ", " +
                   std::to_string(d.slots) + ")";
        });

    py::class_<QoSProfile>(m, "QoSProfile")
        .def(py::init([](double bits, double eps, int delay, double weight) {
                 return QoSProfile{bits, eps, delay, weight};
             }),
             py::arg("bits_required") = 160.0, py::arg("error_prob") = 1e-6,
             py::arg("delay_slots") = 1, py::arg("weight") = 1.0)
        .def_readwrite("bits_required", &QoSProfile::bits_required)
        .def_readwrite("error_prob", &QoSProfile::error_prob)
        .def_readwrite("delay_slots", &QoSProfile::delay_slots)
        .def_readwrite("weight", &QoSProfile::weight);

    py::class_<ProblemInstance>(m, "ProblemInstance")
        .def(py::init<Dims, double, double, std::vector<double>, std::vector<QoSProfile>, std::uint64_t>(),
             py::arg("dims"), py::arg("p_max_dbm"), py::arg("noise_power_dbm"), py::arg("gains"),
             py::arg("qos"), py::arg("seed") = 0)
        .def_property_readonly("dims", &ProblemInstance::dims)
        .def_property_readonly("p_max_dbm", &ProblemInstance::p_max_dbm)
        .def_property_readonly("p_max", &ProblemInstance::p_max)
        .def_property_readonly("noise_power_dbm", &ProblemInstance::noise_power_dbm)
        .def_property_readonly("seed", &ProblemInstance::seed)
        .def_property_readonly("qos", [](const ProblemInstance& i) { return i.qos(); })
        .def_property_readonly("gains",
                               [](const ProblemInstance& i) {
                                   py::array_t<double> out({i.num_users(), i.num_subcarriers()});
                                   std::copy(i.gains().begin(), i.gains().end(), out.mutable_data());
                                   return out;
                               })
        .def("with_p_max_dbm", &ProblemInstance::with_p_max_dbm)
        .def("with_qos", &ProblemInstance::with_qos)
        .def("to_json", [](const ProblemInstance& i) { return instance_to_json(i); })
        .def_static("from_json", &instance_from_json)
        .def(py::self == py::self);

    m.def(
        "generate_instance",
        [](Dims dims, double p_max_dbm, const std::vector<QoSProfile>& qos, std::uint64_t seed,
           double cell_radius_m) {
            ChannelGenSpec spec;
            spec.rng_seed = seed;
            spec.cell_radius_m = cell_radius_m;
            return generate_instance(spec, dims, p_max_dbm, qos);
        },
        py::arg("dims"), py::arg("p_max_dbm"), py::arg("qos"), py::arg("seed") = 1,
        py::arg("cell_radius_m") = 250.0);

    py::class_<SolverConfig>(m, "SolverConfig")
        .def(py::init([](std::optional<double> beta, int j_max, double rel_obj_tol,
                         const std::string& rounding, bool restore, double audit_tol) {
                 SolverConfig c;
                 c.beta = beta;
                 c.j_max = j_max;
                 c.rel_obj_tol = rel_obj_tol;
                 c.rounding = parse_rounding(rounding);
                 c.restore = restore;
                 c.audit_tol = audit_tol;
                 c.validate();
                 return c;
             }),
             py::arg("beta") = py::none(), py::arg("j_max") = 5, py::arg("rel_obj_tol") = 1e-5,
             py::arg("rounding") = "argmax_repair", py::arg("restore") = true,
             py::arg("audit_tol") = 1e-6)
        .def_readwrite("beta", &SolverConfig::beta)
        .def_readwrite("j_max", &SolverConfig::j_max)
        .def_readwrite("restore", &SolverConfig::restore);

    py::class_<SolveReport>(m, "SolveReport")
        .def_readonly("scheme", &SolveReport::scheme)
        .def_readonly("feasible", &SolveReport::feasible)
        .def_readonly("metric", &SolveReport::metric)
        .def_readonly("status", &SolveReport::status)
        .def_readonly("objective_trace", &SolveReport::objective_trace)
        .def_readonly("iterations_used", &SolveReport::iterations_used)
        .def_readonly("relaxation_gap", &SolveReport::relaxation_gap)
        .def_readonly("user_bits", &SolveReport::user_bits)
        .def_readonly("newton_steps", &SolveReport::newton_steps)
        .def_property_readonly("s", [](const SolveReport& r) { return to_array(r.final_alloc.s); })
        .def_property_readonly("p", [](const SolveReport& r) { return to_array(r.final_alloc.p); })
        .def_property_readonly("p_bar", [](const SolveReport& r) { return to_array(r.final_alloc.p_bar); })
        .def("to_json", [](const SolveReport& r) { return report_to_json(r); });

    m.def("default_penalty", &default_penalty);
    m.def("sca_solve", &sca_solve, py::arg("instance"), py::arg("config") = SolverConfig{},
          py::call_guard<py::gil_scoped_release>());
    m.def("solve_upper_bound", &solve_upper_bound, py::arg("instance"), py::arg("config") = SolverConfig{},
          py::call_guard<py::gil_scoped_release>());
    m.def("solve_benchmark1", &solve_benchmark1, py::arg("instance"), py::arg("config") = SolverConfig{},
          py::call_guard<py::gil_scoped_release>());
    m.def("solve_benchmark2", &solve_benchmark2, py::arg("instance"), py::arg("config") = SolverConfig{},
          py::call_guard<py::gil_scoped_release>());
    m.def(
        "oracle_solve",
        [](const ProblemInstance& inst, int grid, int refinements) {
            OracleOptions o;
            o.grid = grid;
            o.refinements = refinements;
            py::gil_scoped_release release;
            return oracle_solve(inst, o);
        },
        py::arg("instance"), py::arg("grid") = 64, py::arg("refinements") = 2);
    m.def(
        "solve_scheme",
        [](const std::string& name, const ProblemInstance& inst, const SolverConfig& cfg) {
            const auto id = parse_scheme(name);
            py::gil_scoped_release release;
            return solve_scheme(id, inst, cfg);
        },
        py::arg("scheme"), py::arg("instance"), py::arg("config") = SolverConfig{});
    m.def("scheme_names", [] {
        std::vector<std::string> out;
        for (auto id : all_schemes()) out.emplace_back(scheme_name(id));
        return out;
    });
    m.def(
        "check_feasible",
        [](const ProblemInstance& inst, const py::array_t<double>& s, const py::array_t<double>& p,
           double tol) {
            const auto st = AllocationState::from_assignment(from_array(inst.dims(), s),
                                                             from_array(inst.dims(), p));
            const auto rep = check_feasible(inst, st, tol);
            return py::make_tuple(rep.feasible, rep.user_bits);
        },
        py::arg("instance"), py::arg("s"), py::arg("p"), py::arg("tol") = 1e-6);

    m.def(
        "_run_experiment_json",
        [](const std::string& axis, const std::string& preset, const std::string& overlay) {
            auto spec = preset_spec(parse_preset(preset), parse_axis(axis));
            if (!overlay.empty()) spec = spec_from_json(overlay, spec);
            spec.validate();
            py::gil_scoped_release release;
            return table_to_json(run_experiment(spec));
        },
        py::arg("axis"), py::arg("preset") = "desk", py::arg("overlay") = "");
}
