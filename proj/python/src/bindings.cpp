#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hybridsim/convergence.hpp"
#include "hybridsim/ensemble.hpp"
#include "hybridsim/hybrid.hpp"
#include "hybridsim/models.hpp"
#include "hybridsim/netdsl.hpp"
#include "hybridsim/report.hpp"
#include "hybridsim/rng.hpp"
#include "hybridsim/ssa.hpp"

namespace py = pybind11;
using namespace hybridsim;

namespace {

py::dict counters_dict(const SolverCounters& c) {
    py::dict d;
    d["steps_accepted"] = c.steps_accepted;
    d["steps_rejected"] = c.steps_rejected;
    d["newton_iters"] = c.newton_iters;
    d["newton_failures"] = c.newton_failures;
    d["rhs_evals"] = c.rhs_evals;
    d["jacobian_evals"] = c.jacobian_evals;
    d["lu_factorizations"] = c.lu_factorizations;
    d["restarts"] = c.restarts;
    d["order_histogram"] = std::vector<std::uint64_t>(c.order_histogram.begin() + 1, c.order_histogram.end());
    d["post_restart_steps"] = c.post_restart_steps;
    d["post_restart_order1"] = c.post_restart_order1;
    return d;
}

IntegratorOptions tolerances(double rtol, double atol) {
    IntegratorOptions o;
    o.rtol = rtol;
    o.atol = atol;
    return o;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Hybrid SSA/ODE simulation of chemical reaction networks";
    m.attr("__version__") = HYBRIDSIM_VERSION;

    py::register_exception<ModelError>(m, "ModelError", PyExc_ValueError);
    py::register_exception<IntegrationError>(m, "IntegrationError", PyExc_RuntimeError);
    py::register_exception<EnsembleError>(m, "EnsembleError", PyExc_RuntimeError);

    py::class_<ReactionNetwork>(m, "Network")
        .def_property_readonly("species", &ReactionNetwork::species_names)
        .def_property_readonly("parameters", &ReactionNetwork::parameter_names)
        .def_property_readonly("slow_reactions", &ReactionNetwork::slow_reaction_names)
        .def_property_readonly("initial_amounts", &ReactionNetwork::initial_amounts)
        .def_property_readonly("reaction_count", &ReactionNetwork::reaction_count)
        .def("with_parameter", &ReactionNetwork::with_parameter, py::arg("name"), py::arg("value"))
        .def("to_text", [](const ReactionNetwork& n) { return print_model(n); })
        .def("__repr__", [](const ReactionNetwork& n) {
            return "<Network species=" + std::to_string(n.species_count()) +
                   " reactions=" + std::to_string(n.reaction_count()) + ">";
        });

    m.def("builtin_models", &builtin_model_ids);
    m.def(
        "build_model",
        [](const std::string& model, double scale_factor, const std::map<std::string, double>& overrides) {
            return build_model({model, scale_factor, overrides});
        },
        py::arg("model"), py::arg("scale_factor") = 1.0, py::arg("overrides") = std::map<std::string, double>{});
    m.def(
        "parse_model", [](const std::string& text, const std::string& origin) { return load_model({text, origin}); },
        py::arg("text"), py::arg("origin") = "<python>");
    m.def("load_model_file", &load_model_file, py::arg("path"));

    m.def(
        "simulate",
        [](const ReactionNetwork& net, double t_final, const std::string& solver, std::uint64_t seed,
           std::uint64_t stream_id, double rtol, double atol, std::vector<double> sample_times) {
            HybridOptions o;
            o.solver = parse_solver_kind(solver);
            o.integrator = tolerances(rtol, atol);
            o.sample_times = std::move(sample_times);
            RngStream stream(seed, stream_id);
            HybridRunResult r;
            {
                py::gil_scoped_release release;
                r = hybrid_simulate(net, t_final, o, stream);
            }
            py::dict d;
            d["t"] = r.final_state.t;
            d["x"] = r.final_state.x;
            d["firing_counts"] = r.firing_counts;
            d["counters"] = counters_dict(r.counters);
            d["sample_t"] = r.sample_t;
            d["samples"] = r.samples;
            return d;
        },
        py::arg("network"), py::arg("t_final"), py::arg("solver") = "irk", py::arg("seed") = 1,
        py::arg("stream") = 0, py::arg("rtol") = 1e-3, py::arg("atol") = 1e-6,
        py::arg("sample_times") = std::vector<double>{});

    m.def(
        "ssa_simulate",
        [](const ReactionNetwork& net, double t_final, std::uint64_t seed, std::uint64_t stream_id) {
            RngStream stream(seed, stream_id);
            SsaTrace tr;
            {
                py::gil_scoped_release release;
                tr = ssa_simulate(net, t_final, stream);
            }
            py::dict d;
            d["t"] = tr.final_state.t;
            d["x"] = tr.final_state.x;
            d["firing_counts"] = tr.firing_counts;
            return d;
        },
        py::arg("network"), py::arg("t_final"), py::arg("seed") = 1, py::arg("stream") = 0);

    py::class_<EnsembleReport>(m, "EnsembleReport")
        .def_readonly("model", &EnsembleReport::model)
        .def_readonly("method", &EnsembleReport::method)
        .def_readonly("runs", &EnsembleReport::runs)
        .def_readonly("seed", &EnsembleReport::seed)
        .def_readonly("slow_reactions", &EnsembleReport::slow_reactions)
        .def_readonly("mean_firings", &EnsembleReport::mean_firings)
        .def_readonly("sd_firings", &EnsembleReport::sd_firings)
        .def_readonly("wall_time_seconds", &EnsembleReport::wall_time_seconds)
        .def_property_readonly("counters", [](const EnsembleReport& r) { return counters_dict(r.total_counters); })
        .def("to_csv", [](const EnsembleReport& r) { return ensemble_csv({r}); })
        .def("to_json", [](const EnsembleReport& r) { return ensemble_json({r}); });

    m.def(
        "run_ensemble",
        [](const ReactionNetwork& net, const std::string& method, std::size_t runs, double t_final,
           std::uint64_t seed, double rtol, double atol, unsigned threads, const std::string& model_name,
           double scale_factor) {
            EnsembleSpec s;
            s.method = parse_ensemble_method(method);
            s.runs = runs;
            s.t_final = t_final;
            s.seed = seed;
            s.rtol = rtol;
            s.atol = atol;
            s.threads = threads;
            py::gil_scoped_release release;
            return run_ensemble(net, s, model_name, scale_factor);
        },
        py::arg("network"), py::arg("method") = "irk", py::arg("runs") = 100, py::arg("t_final") = 200.0,
        py::arg("seed") = 1, py::arg("rtol") = 1e-3, py::arg("atol") = 1e-6, py::arg("threads") = 1,
        py::arg("model_name") = "custom", py::arg("scale_factor") = 1.0);
    m.def("ensemble_csv", &ensemble_csv, py::arg("reports"));

    m.def(
        "run_convergence",
        [](const std::string& study, int order, std::vector<double> steps) {
            const ErrorOrderReport r = run_convergence({parse_study_kind(study), order, std::move(steps)});
            py::dict d;
            d["study"] = std::string(to_string(r.kind));
            d["order"] = r.order;
            d["step_sizes"] = r.step_sizes;
            d["errors"] = r.errors;
            d["slope"] = r.slope;
            return d;
        },
        py::arg("study"), py::arg("order") = 2, py::arg("steps") = std::vector<double>{});

    m.def("philox4x32_10", &philox4x32_10, py::arg("counter"), py::arg("key"));
    py::class_<RngStream>(m, "RngStream")
        .def(py::init<std::uint64_t, std::uint64_t>(), py::arg("seed"), py::arg("stream"))
        .def("uniform", &RngStream::next_uniform)
        .def("exponential", &RngStream::next_exponential, py::arg("rate"));
}
