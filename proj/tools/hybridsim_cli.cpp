// hybridsim: single runs, ensembles, parameter sweeps, convergence studies
// and model export.

#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "hybridsim/convergence.hpp"
#include "hybridsim/ensemble.hpp"
#include "hybridsim/models.hpp"
#include "hybridsim/netdsl.hpp"
#include "hybridsim/report.hpp"

namespace {

using namespace hybridsim;

struct ModelOptions {
    std::string model = "toy";
    std::string model_file;
    double scale_factor = 1.0;
    std::vector<std::string> sets;
};

struct RunOptions {
    std::string solver = "irk";
    double rtol = 1e-3;
    double atol = 1e-6;
    std::size_t runs = 1;
    double t_final = 200.0;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    std::string format = "csv";
    std::string out = "-";
    std::string event_log;
};

std::map<std::string, double> parse_sets(const std::vector<std::string>& sets) {
    std::map<std::string, double> out;
    for (const auto& s : sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw std::invalid_argument("--set expects key=value, got '" + s + "'");
        }
        const std::string key = s.substr(0, eq);
        const std::string value = s.substr(eq + 1);
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(value, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != value.size() || value.empty()) {
            throw std::invalid_argument("--set " + key + ": '" + value + "' is not a number");
        }
        out[key] = v;
    }
    return out;
}

ReactionNetwork load_network(const ModelOptions& m, std::string& name) {
    const auto overrides = parse_sets(m.sets);
    if (!m.model_file.empty()) {
        name = m.model_file;
        return apply_overrides(load_model_file(m.model_file), overrides);
    }
    name = m.model;
    return build_model(ModelConfig{m.model, m.scale_factor, overrides});
}

void add_model_options(CLI::App* app, ModelOptions& m) {
    auto* model = app->add_option("--model", m.model, "Built-in model: toy, gene or cellcycle")
                      ->check(CLI::IsMember({"toy", "gene", "cellcycle"}))
                      ->capture_default_str();
    auto* file = app->add_option("--model-file", m.model_file, "Model file in the reaction format");
    model->excludes(file);
    app->add_option("--scale-factor", m.scale_factor, "Slow-rate scale factor c (gene, cellcycle)")
        ->capture_default_str();
    app->add_option("--set", m.sets, "Override a parameter or initial amount (key=value)");
}

void add_run_options(CLI::App* app, RunOptions& r, bool ensemble) {
    app->add_option("--solver", r.solver, "irk, bdf, or ssa for the all-stochastic reference")
        ->check(CLI::IsMember({"irk", "bdf", "ssa"}))
        ->capture_default_str();
    app->add_option("--rtol", r.rtol, "Relative tolerance")->capture_default_str();
    app->add_option("--atol", r.atol, "Absolute tolerance")->capture_default_str();
    app->add_option("--t-final", r.t_final, "Final time")->capture_default_str();
    app->add_option("--seed", r.seed, "Master seed")->capture_default_str();
    app->add_option("--format", r.format, "Report format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    app->add_option("--out", r.out, "Report path ('-' for stdout)")->capture_default_str();
    app->add_option("--event-log", r.event_log, "Write every firing to this CSV file");
    if (ensemble) {
        app->add_option("--runs", r.runs, "Number of runs")->check(CLI::PositiveNumber)->capture_default_str();
        app->add_option("--threads", r.threads, "Worker threads")->capture_default_str();
    }
}

EnsembleSpec make_spec(const RunOptions& r) {
    EnsembleSpec spec;
    spec.method = parse_ensemble_method(r.solver);
    spec.runs = r.runs;
    spec.t_final = r.t_final;
    spec.seed = r.seed;
    spec.rtol = r.rtol;
    spec.atol = r.atol;
    spec.threads = r.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : r.threads;
    spec.record_events = !r.event_log.empty();
    spec.keep_runs = spec.record_events;
    return spec;
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) {
            continue;
        }
        std::size_t used = 0;
        const double v = std::stod(item, &used);
        if (used != item.size()) {
            throw std::invalid_argument("'" + item + "' is not a number");
        }
        out.push_back(v);
    }
    return out;
}

int run_main(int argc, char** argv) {
    CLI::App app{"Hybrid stochastic-deterministic simulation of reaction networks"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(HYBRIDSIM_VERSION));

    ModelOptions run_model;
    RunOptions run_opts;
    auto* run = app.add_subcommand("run", "Single run; prints its firing counts and counters");
    add_model_options(run, run_model);
    add_run_options(run, run_opts, false);

    ModelOptions ens_model;
    RunOptions ens_opts;
    auto* ensemble = app.add_subcommand("ensemble", "Independent runs with summary statistics");
    add_model_options(ensemble, ens_model);
    add_run_options(ensemble, ens_opts, true);

    ModelOptions sweep_model;
    RunOptions sweep_opts;
    std::string sweep_param;
    std::string sweep_values;
    auto* sweep = app.add_subcommand("sweep", "Ensembles over the values of one parameter");
    add_model_options(sweep, sweep_model);
    add_run_options(sweep, sweep_opts, true);
    sweep->add_option("--param", sweep_param, "Parameter to sweep; 'c' sweeps the scale factor")
        ->required();
    sweep->add_option("--values", sweep_values, "Comma-separated values")->required();

    std::string study = "irk_order";
    int study_order = 2;
    std::string study_steps;
    std::string conv_format = "csv";
    std::string conv_out = "-";
    auto* conv = app.add_subcommand("convergence", "Fixed-step error-order study");
    conv->add_option("--study", study, "irk_order, bdf_order, irk_event_order or bdf_event_order")
        ->check(CLI::IsMember({"irk_order", "bdf_order", "irk_event_order", "bdf_event_order"}))
        ->capture_default_str();
    conv->add_option("--order", study_order, "BDF order")->check(CLI::Range(1, 5))->capture_default_str();
    conv->add_option("--steps", study_steps, "Comma-separated step sizes (decreasing)");
    conv->add_option("--format", conv_format, "Report format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    conv->add_option("--out", conv_out, "Report path ('-' for stdout)")->capture_default_str();

    ModelOptions export_model;
    std::string export_out = "-";
    auto* exp = app.add_subcommand("export-model", "Print a model in the reaction file format");
    add_model_options(exp, export_model);
    exp->add_option("--out", export_out, "Output path ('-' for stdout)")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    if (run->parsed() || ensemble->parsed()) {
        const bool single = run->parsed();
        const ModelOptions& m = single ? run_model : ens_model;
        RunOptions r = single ? run_opts : ens_opts;
        if (single) {
            r.runs = 1;
        }
        std::string name;
        const ReactionNetwork network = load_network(m, name);
        const EnsembleSpec spec = make_spec(r);
        const EnsembleReport report = run_ensemble(network, spec, name, m.scale_factor);
        emit_report({report}, parse_report_format(r.format), r.out);
        if (!r.event_log.empty()) {
            write_text(event_log_csv(report), r.event_log);
        }
        return 0;
    }
    if (sweep->parsed()) {
        const std::vector<double> values = parse_list(sweep_values);
        std::vector<EnsembleReport> reports;
        const EnsembleSpec spec = make_spec(sweep_opts);
        std::string event_rows;
        for (double v : values) {
            ModelOptions m = sweep_model;
            if (sweep_param == "c" || sweep_param == "scale_factor") {
                m.scale_factor = v;
            } else {
                std::ostringstream s;
                s.precision(17);
                s << sweep_param << '=' << v;
                m.sets.push_back(s.str());
            }
            std::string name;
            const ReactionNetwork network = load_network(m, name);
            EnsembleReport report = run_ensemble(network, spec, name, m.scale_factor);
            report.sweep_parameter = sweep_param;
            report.sweep_value = v;
            if (!sweep_opts.event_log.empty()) {
                std::string rows = event_log_csv(report);
                event_rows += event_rows.empty() ? rows : rows.substr(rows.find('\n') + 1);
            }
            report.run_results.clear();
            reports.push_back(std::move(report));
        }
        emit_report(reports, parse_report_format(sweep_opts.format), sweep_opts.out);
        if (!sweep_opts.event_log.empty()) {
            write_text(event_rows, sweep_opts.event_log);
        }
        return 0;
    }
    if (conv->parsed()) {
        ConvergenceParams params;
        params.kind = parse_study_kind(study);
        params.order = study_order;
        if (!study_steps.empty()) {
            params.step_sizes = parse_list(study_steps);
        }
        emit_report(run_convergence(params), parse_report_format(conv_format), conv_out);
        return 0;
    }
    if (exp->parsed()) {
        std::string name;
        write_text(print_model(load_network(export_model, name)), export_out);
        return 0;
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_main(argc, argv);
    } catch (const ModelError& e) {
        std::cerr << "hybridsim: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "hybridsim: " << e.what() << '\n';
        return 1;
    }
}
