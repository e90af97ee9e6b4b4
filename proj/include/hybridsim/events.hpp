#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace hybridsim {

/// (time, z) pairs from one accepted step, in time order. For the Radau
/// solver these are the step start and the three stage values; for BDF the
/// newest q+1 history records.
struct CrossingSample {
    std::vector<double> t;
    std::vector<double> z;
};

enum class CrossingStatus { none, crossed };

enum class LocalizationMethod {
    inverse_lagrange,
    fallback_bisection,
    step_endpoint,  // z hit exactly zero at the step end
};

[[nodiscard]] std::string_view to_string(LocalizationMethod m) noexcept;

struct EventRecord {
    double t_event = 0.0;
    LocalizationMethod method = LocalizationMethod::inverse_lagrange;
    double residual = 0.0;  // |z(t_event)| on the dense output
};

/// The driver failed to keep z negative at the start of a segment.
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// The bracketed search lost its sign change or ran out of iterations.
class LocalizationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// crossed iff the last z is >= 0. Throws ContractViolation when the first
/// z is already nonnegative.
[[nodiscard]] CrossingStatus detect_crossing(const CrossingSample& sample);

/// T(0) of the inverse Lagrange polynomial through the (z_i, t_i) pairs,
/// clamped into (t_lo, t_hi]. nullopt signals a non-monotone sample, which
/// the caller answers with fallback_localize.
[[nodiscard]] std::optional<EventRecord> inverse_interpolate(const CrossingSample& sample,
                                                             double t_lo, double t_hi);

/// Bracketed secant/bisection on a dense-output z with z(t_lo) < 0 <= z(t_hi),
/// to |t_hi - t_lo| < event_tol.
[[nodiscard]] EventRecord fallback_localize(const std::function<double(double)>& z_eval,
                                            double t_lo, double t_hi, double event_tol,
                                            int max_iterations = 50);

/// max(1e-9, rtol * h).
[[nodiscard]] double event_tolerance(double rtol, double h) noexcept;

/// Full localization policy for one step [t_lo, t_hi] that crossed:
/// endpoint tie, else inverse interpolation polished on the dense output to
/// event_tol,
/// else the bracketed fallback.
[[nodiscard]] EventRecord localize_event(const CrossingSample& sample,
                                         const std::function<double(double)>& z_eval, double t_lo,
                                         double t_hi, double event_tol);

}  // namespace hybridsim
