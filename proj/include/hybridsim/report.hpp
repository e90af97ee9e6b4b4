#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "hybridsim/convergence.hpp"
#include "hybridsim/ensemble.hpp"

namespace hybridsim {

enum class ReportFormat { csv, json };

[[nodiscard]] ReportFormat parse_report_format(std::string_view name);

inline constexpr int kReportSchemaVersion = 1;

/// CSV columns, in order: model, method, sweep_parameter, sweep_value,
/// scale_factor, runs, t_final, seed, rtol, atol, code_version, then
/// mean_<r> and sd_<r> for every slow reaction r, then the summed counters
/// (steps_accepted, steps_rejected, newton_iters, newton_failures,
/// rhs_evals, jacobian_evals, lu_factorizations, restarts, order_1 ..
/// order_5, post_restart_steps, post_restart_order1), the localization
/// counts (loc_inverse_lagrange, loc_fallback_bisection, loc_step_endpoint)
/// and the overshoot bins (overshoot_0 .. overshoot_4). Wall time is left
/// out so equal inputs give equal bytes; the JSON form carries it.
[[nodiscard]] std::string ensemble_csv(const std::vector<EnsembleReport>& reports);
[[nodiscard]] std::string ensemble_json(const std::vector<EnsembleReport>& reports);

/// Columns: study, order, h, error, slope (the fitted slope repeats on
/// every row).
[[nodiscard]] std::string convergence_csv(const ErrorOrderReport& report);
[[nodiscard]] std::string convergence_json(const ErrorOrderReport& report);

/// Columns: run, t_event, reaction, method, residual, overshoot.
[[nodiscard]] std::string event_log_csv(const EnsembleReport& report);

/// Renders in the given format and writes to path ("-" for stdout).
void emit_report(const std::vector<EnsembleReport>& reports, ReportFormat format,
                 const std::string& path);
void emit_report(const ErrorOrderReport& report, ReportFormat format, const std::string& path);

/// Writes text to path ("-" for stdout). Throws std::runtime_error carrying
/// the system error message.
void write_text(const std::string& text, const std::string& path);

}  // namespace hybridsim
