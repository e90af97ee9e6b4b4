#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace hybridsim {

/// irk_order / bdf_order: fixed-step y' = -y on [0, 1], error at t = 1.
/// irk_event_order / bdf_event_order: fixed-step x' = 1, z' = x from
/// x = 1, z = -1; the error is |t_hat - (sqrt(3) - 1)| with t_hat read off
/// the crossing step by inverse interpolation alone.
enum class StudyKind { irk_order, bdf_order, irk_event_order, bdf_event_order };

[[nodiscard]] std::string_view to_string(StudyKind kind) noexcept;
[[nodiscard]] StudyKind parse_study_kind(std::string_view name);

struct ConvergenceParams {
    StudyKind kind = StudyKind::irk_order;
    int order = 2;  // BDF studies
    std::vector<double> step_sizes;  // empty: the study's default ladder
};

struct ErrorOrderReport {
    StudyKind kind = StudyKind::irk_order;
    int order = 0;  // 0 for IRK studies
    std::vector<double> step_sizes;
    std::vector<double> errors;
    double slope = 0.0;
};

/// {0.1, 0.05, 0.025, 0.0125} for solver studies, {0.2, 0.1, 0.05, 0.025}
/// for event studies.
[[nodiscard]] std::vector<double> default_step_sizes(StudyKind kind);

/// Least-squares slope of log(errors) against log(step_sizes). Throws
/// std::invalid_argument for fewer than 3 points or nonpositive data.
[[nodiscard]] double fit_loglog_slope(const std::vector<double>& step_sizes,
                                      const std::vector<double>& errors);

/// Runs the study. Throws std::invalid_argument for fewer than 3 step sizes,
/// sizes that are not strictly decreasing, or a BDF order outside [1, 5].
[[nodiscard]] ErrorOrderReport run_convergence(const ConvergenceParams& params);

}  // namespace hybridsim
