#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "hybridsim/hybrid.hpp"
#include "hybridsim/network.hpp"

namespace hybridsim {

/// irk and bdf run the hybrid method; ssa treats every reaction as
/// stochastic and serves as the reference.
enum class EnsembleMethod { irk, bdf, ssa };

[[nodiscard]] std::string_view to_string(EnsembleMethod m) noexcept;
[[nodiscard]] EnsembleMethod parse_ensemble_method(std::string_view name);

struct EnsembleSpec {
    EnsembleMethod method = EnsembleMethod::irk;
    std::size_t runs = 1;
    double t_final = 1.0;
    std::uint64_t seed = 1;
    double rtol = 1e-3;
    double atol = 1e-6;
    unsigned threads = 1;
    bool keep_runs = false;  // keep per-run results in the report
    bool record_events = false;  // per-run firing logs (hybrid methods)
};

/// Per-run outcome.
struct RunSummary {
    std::vector<std::uint64_t> firing_counts;  // per slow reaction
    SolverCounters counters;
    std::array<std::uint64_t, 3> localization_counts{};
    std::array<std::uint64_t, kOvershootBins> overshoot_histogram{};
    std::vector<FiringRecord> event_log;
};

struct EnsembleReport {
    std::string model;
    std::string method;
    double rtol = 0.0;
    double atol = 0.0;
    double scale_factor = 1.0;
    std::string sweep_parameter;  // empty outside sweeps
    double sweep_value = 0.0;
    std::size_t runs = 0;
    double t_final = 0.0;
    std::uint64_t seed = 0;
    std::string code_version;
    std::vector<std::string> slow_reactions;
    std::vector<double> mean_firings;
    std::vector<double> sd_firings;  // sample standard deviation; 0 for one run
    SolverCounters total_counters;
    std::array<std::uint64_t, 3> localization_counts{};
    std::array<std::uint64_t, kOvershootBins> overshoot_histogram{};
    double wall_time_seconds = 0.0;
    std::vector<RunSummary> run_results;  // empty unless keep_runs
};

/// A run failed; carries its index and stream id.
class EnsembleError : public std::runtime_error {
public:
    EnsembleError(std::size_t run_index, std::uint64_t stream_id, const std::string& what);
    [[nodiscard]] std::size_t run_index() const noexcept { return run_index_; }
    [[nodiscard]] std::uint64_t stream_id() const noexcept { return stream_id_; }

private:
    std::size_t run_index_;
    std::uint64_t stream_id_;
};

/// One run with stream (seed, run_index).
[[nodiscard]] RunSummary run_single(const ReactionNetwork& network, const EnsembleSpec& spec,
                                    std::size_t run_index);

/// `runs` independent runs on a pool of `threads` workers, merged by run
/// index so the report does not depend on scheduling.
[[nodiscard]] EnsembleReport run_ensemble(const ReactionNetwork& network, const EnsembleSpec& spec,
                                          const std::string& model_name = "custom",
                                          double scale_factor = 1.0);

}  // namespace hybridsim
