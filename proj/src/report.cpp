#include "hybridsim/report.hpp"

#include <cerrno>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "hybridsim/expr.hpp"

namespace hybridsim {

namespace {

using nlohmann::json;

const char* const kCounterNames[] = {"steps_accepted", "steps_rejected",    "newton_iters",
                                     "newton_failures", "rhs_evals",        "jacobian_evals",
                                     "lu_factorizations", "restarts"};

std::vector<std::uint64_t> counter_values(const SolverCounters& c) {
    std::vector<std::uint64_t> v = {c.steps_accepted, c.steps_rejected, c.newton_iters,
                                    c.newton_failures, c.rhs_evals,     c.jacobian_evals,
                                    c.lu_factorizations, c.restarts};
    for (int q = 1; q <= 5; ++q) {
        v.push_back(c.order_histogram[static_cast<std::size_t>(q)]);
    }
    v.push_back(c.post_restart_steps);
    v.push_back(c.post_restart_order1);
    return v;
}

std::vector<std::string> counter_columns() {
    std::vector<std::string> names(std::begin(kCounterNames), std::end(kCounterNames));
    for (int q = 1; q <= 5; ++q) {
        names.push_back("order_" + std::to_string(q));
    }
    names.emplace_back("post_restart_steps");
    names.emplace_back("post_restart_order1");
    return names;
}

const char* const kLocalizationNames[] = {"inverse_lagrange", "fallback_bisection", "step_endpoint"};

// Quotes a CSV field when needed.
std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    return out + "\"";
}

json counters_json(const SolverCounters& c) {
    json j;
    const auto names = counter_columns();
    const auto values = counter_values(c);
    for (std::size_t i = 0; i < names.size(); ++i) {
        j[names[i]] = values[i];
    }
    return j;
}

}  // namespace

ReportFormat parse_report_format(std::string_view name) {
    if (name == "csv") {
        return ReportFormat::csv;
    }
    if (name == "json") {
        return ReportFormat::json;
    }
    throw std::invalid_argument("unknown format '" + std::string(name) + "' (expected csv or json)");
}

std::string ensemble_csv(const std::vector<EnsembleReport>& reports) {
    std::ostringstream out;
    std::vector<std::string> header = {"model", "method", "sweep_parameter", "sweep_value",
                                       "scale_factor", "runs", "t_final", "seed", "rtol", "atol",
                                       "code_version"};
    const std::vector<std::string> reactions =
        reports.empty() ? std::vector<std::string>{} : reports.front().slow_reactions;
    for (const auto& r : reactions) {
        header.push_back("mean_" + r);
        header.push_back("sd_" + r);
    }
    for (const auto& c : counter_columns()) {
        header.push_back(c);
    }
    for (const char* m : kLocalizationNames) {
        header.push_back(std::string("loc_") + m);
    }
    for (std::size_t b = 0; b < kOvershootBins; ++b) {
        header.push_back("overshoot_" + std::to_string(b));
    }
    for (std::size_t i = 0; i < header.size(); ++i) {
        out << (i ? "," : "") << csv_field(header[i]);
    }
    out << '\n';
    for (const auto& rep : reports) {
        if (rep.slow_reactions != reactions) {
            throw std::invalid_argument("ensemble_csv: reports have different slow reactions");
        }
        out << csv_field(rep.model) << ',' << csv_field(rep.method) << ','
            << csv_field(rep.sweep_parameter) << ','
            << (rep.sweep_parameter.empty() ? std::string() : format_real(rep.sweep_value)) << ','
            << format_real(rep.scale_factor) << ',' << rep.runs << ',' << format_real(rep.t_final)
            << ',' << rep.seed << ',' << format_real(rep.rtol) << ',' << format_real(rep.atol) << ','
            << csv_field(rep.code_version);
        for (std::size_t j = 0; j < reactions.size(); ++j) {
            out << ',' << format_real(rep.mean_firings[j]) << ',' << format_real(rep.sd_firings[j]);
        }
        for (auto v : counter_values(rep.total_counters)) {
            out << ',' << v;
        }
        for (auto v : rep.localization_counts) {
            out << ',' << v;
        }
        for (auto v : rep.overshoot_histogram) {
            out << ',' << v;
        }
        out << '\n';
    }
    return out.str();
}

std::string ensemble_json(const std::vector<EnsembleReport>& reports) {
    json root;
    root["schema_version"] = kReportSchemaVersion;
    root["kind"] = "ensemble";
    root["code_version"] = HYBRIDSIM_VERSION;
    root["reports"] = json::array();
    for (const auto& rep : reports) {
        json j;
        j["model"] = rep.model;
        j["method"] = rep.method;
        j["sweep_parameter"] = rep.sweep_parameter;
        if (!rep.sweep_parameter.empty()) {
            j["sweep_value"] = rep.sweep_value;
        }
        j["scale_factor"] = rep.scale_factor;
        j["runs"] = rep.runs;
        j["t_final"] = rep.t_final;
        j["seed"] = rep.seed;
        j["rtol"] = rep.rtol;
        j["atol"] = rep.atol;
        j["code_version"] = rep.code_version;
        j["wall_time_seconds"] = rep.wall_time_seconds;
        json firings = json::array();
        for (std::size_t i = 0; i < rep.slow_reactions.size(); ++i) {
            firings.push_back({{"reaction", rep.slow_reactions[i]},
                               {"mean", rep.mean_firings[i]},
                               {"sd", rep.sd_firings[i]}});
        }
        j["firings"] = firings;
        j["counters"] = counters_json(rep.total_counters);
        json loc;
        for (std::size_t i = 0; i < rep.localization_counts.size(); ++i) {
            loc[kLocalizationNames[i]] = rep.localization_counts[i];
        }
        j["localization"] = loc;
        j["overshoot_histogram"] = rep.overshoot_histogram;
        root["reports"].push_back(j);
    }
    return root.dump(2) + "\n";
}

std::string convergence_csv(const ErrorOrderReport& report) {
    std::ostringstream out;
    out << "study,order,h,error,slope\n";
    for (std::size_t i = 0; i < report.step_sizes.size(); ++i) {
        out << to_string(report.kind) << ',' << report.order << ',' << format_real(report.step_sizes[i])
            << ',' << format_real(report.errors[i]) << ',' << format_real(report.slope) << '\n';
    }
    return out.str();
}

std::string convergence_json(const ErrorOrderReport& report) {
    json root;
    root["schema_version"] = kReportSchemaVersion;
    root["kind"] = "convergence";
    root["code_version"] = HYBRIDSIM_VERSION;
    root["study"] = std::string(to_string(report.kind));
    root["order"] = report.order;
    root["step_sizes"] = report.step_sizes;
    root["errors"] = report.errors;
    root["slope"] = report.slope;
    return root.dump(2) + "\n";
}

std::string event_log_csv(const EnsembleReport& report) {
    std::ostringstream out;
    out << "run,t_event,reaction,method,residual,overshoot\n";
    for (std::size_t run = 0; run < report.run_results.size(); ++run) {
        for (const auto& rec : report.run_results[run].event_log) {
            out << run << ',' << format_real(rec.event.t_event) << ','
                << csv_field(report.slow_reactions.at(rec.reaction)) << ','
                << to_string(rec.event.method) << ',' << format_real(rec.event.residual) << ','
                << format_real(rec.overshoot) << '\n';
        }
    }
    return out.str();
}

void write_text(const std::string& text, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << text;
        std::cout.flush();
        if (!std::cout) {
            throw std::runtime_error("cannot write to standard output");
        }
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) {
        throw std::runtime_error("cannot open '" + path + "': " + std::strerror(errno));
    }
    file << text;
    file.close();
    if (!file) {
        throw std::runtime_error("cannot write '" + path + "': " + std::strerror(errno));
    }
}

void emit_report(const std::vector<EnsembleReport>& reports, ReportFormat format,
                 const std::string& path) {
    write_text(format == ReportFormat::csv ? ensemble_csv(reports) : ensemble_json(reports), path);
}

void emit_report(const ErrorOrderReport& report, ReportFormat format, const std::string& path) {
    write_text(format == ReportFormat::csv ? convergence_csv(report) : convergence_json(report), path);
}

}  // namespace hybridsim
