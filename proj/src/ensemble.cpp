#include "hybridsim/ensemble.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>

#include "hybridsim/ssa.hpp"

namespace hybridsim {

std::string_view to_string(EnsembleMethod m) noexcept {
    switch (m) {
    case EnsembleMethod::irk:
        return "irk";
    case EnsembleMethod::bdf:
        return "bdf";
    case EnsembleMethod::ssa:
        return "ssa";
    }
    return "unknown";
}

EnsembleMethod parse_ensemble_method(std::string_view name) {
    if (name == "irk") {
        return EnsembleMethod::irk;
    }
    if (name == "bdf") {
        return EnsembleMethod::bdf;
    }
    if (name == "ssa") {
        return EnsembleMethod::ssa;
    }
    throw std::invalid_argument("unknown method '" + std::string(name) + "' (expected irk, bdf or ssa)");
}

EnsembleError::EnsembleError(std::size_t run_index, std::uint64_t stream_id, const std::string& what)
    : std::runtime_error("run " + std::to_string(run_index) + " (stream " + std::to_string(stream_id) +
                         ") failed: " + what),
      run_index_(run_index),
      stream_id_(stream_id) {}

RunSummary run_single(const ReactionNetwork& network, const EnsembleSpec& spec,
                      std::size_t run_index) {
    RngStream stream(spec.seed, run_index);
    RunSummary out;
    if (spec.method == EnsembleMethod::ssa) {
        const SsaTrace trace = ssa_simulate(network, spec.t_final, stream);
        for (std::size_t j : network.slow_reactions()) {
            out.firing_counts.push_back(trace.firing_counts[j]);
        }
        return out;
    }
    HybridOptions options;
    options.solver = spec.method == EnsembleMethod::irk ? SolverKind::irk : SolverKind::bdf;
    options.integrator.rtol = spec.rtol;
    options.integrator.atol = spec.atol;
    options.record_events = spec.record_events;
    HybridRunResult r = hybrid_simulate(network, spec.t_final, options, stream);
    out.firing_counts = std::move(r.firing_counts);
    out.counters = r.counters;
    out.localization_counts = r.localization_counts;
    out.overshoot_histogram = r.overshoot_histogram;
    out.event_log = std::move(r.event_log);
    return out;
}

EnsembleReport run_ensemble(const ReactionNetwork& network, const EnsembleSpec& spec,
                            const std::string& model_name, double scale_factor) {
    if (spec.runs < 1) {
        throw std::invalid_argument("run_ensemble: runs must be at least 1");
    }
    if (!(spec.t_final > 0.0)) {
        throw std::invalid_argument("run_ensemble: t_final must be positive");
    }
    const auto start = std::chrono::steady_clock::now();
    std::vector<std::optional<RunSummary>> results(spec.runs);
    std::atomic<std::size_t> next{0};
    std::mutex failure_mutex;
    std::optional<std::size_t> failed_run;
    std::string failure;

    const auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= spec.runs) {
                return;
            }
            {
                std::lock_guard lock(failure_mutex);
                if (failed_run && *failed_run < i) {
                    return;
                }
            }
            try {
                results[i] = run_single(network, spec, i);
            } catch (const std::exception& e) {
                std::lock_guard lock(failure_mutex);
                if (!failed_run || i < *failed_run) {
                    failed_run = i;
                    failure = e.what();
                }
            }
        }
    };
    const unsigned threads = std::max(1u, std::min<unsigned>(spec.threads, static_cast<unsigned>(spec.runs)));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
        for (auto& th : pool) {
            th.join();
        }
    }
    if (failed_run) {
        throw EnsembleError(*failed_run, *failed_run, failure);
    }

    EnsembleReport report;
    report.model = model_name;
    report.method = std::string(to_string(spec.method));
    report.rtol = spec.rtol;
    report.atol = spec.atol;
    report.scale_factor = scale_factor;
    report.runs = spec.runs;
    report.t_final = spec.t_final;
    report.seed = spec.seed;
    report.code_version = HYBRIDSIM_VERSION;
    report.slow_reactions = network.slow_reaction_names();
    const std::size_t m = report.slow_reactions.size();
    report.mean_firings.assign(m, 0.0);
    report.sd_firings.assign(m, 0.0);

    // Welford's update, in run order.
    std::vector<double> m2(m, 0.0);
    for (std::size_t i = 0; i < spec.runs; ++i) {
        const RunSummary& r = *results[i];
        const double k = static_cast<double>(i + 1);
        for (std::size_t j = 0; j < m; ++j) {
            const double x = static_cast<double>(r.firing_counts[j]);
            const double delta = x - report.mean_firings[j];
            report.mean_firings[j] += delta / k;
            m2[j] += delta * (x - report.mean_firings[j]);
        }
        report.total_counters += r.counters;
        for (std::size_t b = 0; b < r.localization_counts.size(); ++b) {
            report.localization_counts[b] += r.localization_counts[b];
        }
        for (std::size_t b = 0; b < r.overshoot_histogram.size(); ++b) {
            report.overshoot_histogram[b] += r.overshoot_histogram[b];
        }
    }
    if (spec.runs > 1) {
        for (std::size_t j = 0; j < m; ++j) {
            report.sd_firings[j] = std::sqrt(m2[j] / static_cast<double>(spec.runs - 1));
        }
    }
    if (spec.keep_runs) {
        report.run_results.reserve(spec.runs);
        for (auto& r : results) {
            report.run_results.push_back(std::move(*r));
        }
    }
    report.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

}  // namespace hybridsim
