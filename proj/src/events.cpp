#include "hybridsim/events.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace hybridsim {

std::string_view to_string(LocalizationMethod m) noexcept {
    switch (m) {
    case LocalizationMethod::inverse_lagrange:
        return "inverse_lagrange";
    case LocalizationMethod::fallback_bisection:
        return "fallback_bisection";
    case LocalizationMethod::step_endpoint:
        return "step_endpoint";
    }
    return "unknown";
}

CrossingStatus detect_crossing(const CrossingSample& sample) {
    if (sample.z.empty() || sample.z.size() != sample.t.size()) {
        throw std::invalid_argument("detect_crossing: empty or inconsistent sample");
    }
    if (!(sample.z.front() < 0.0)) {
        throw ContractViolation("detect_crossing: z is not negative at the start of the sample (z = " +
                                std::to_string(sample.z.front()) + ")");
    }
    return sample.z.back() >= 0.0 ? CrossingStatus::crossed : CrossingStatus::none;
}

namespace {

// Lagrange interpolation through (nodes[i], values[i]) evaluated at x.
double lagrange(const std::vector<double>& nodes, const std::vector<double>& values, double x) {
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        double basis = 1.0;
        for (std::size_t j = 0; j < nodes.size(); ++j) {
            if (j != i) {
                basis *= (x - nodes[j]) / (nodes[i] - nodes[j]);
            }
        }
        sum += basis * values[i];
    }
    return sum;
}

double clamp_into(double t, double t_lo, double t_hi) {
    const double lo = std::nextafter(t_lo, std::numeric_limits<double>::infinity());
    return std::clamp(t, std::min(lo, t_hi), t_hi);
}

}  // namespace

std::optional<EventRecord> inverse_interpolate(const CrossingSample& sample, double t_lo,
                                               double t_hi) {
    for (std::size_t i = 1; i < sample.z.size(); ++i) {
        if (!(sample.z[i] > sample.z[i - 1])) {
            return std::nullopt;
        }
    }
    const double t = clamp_into(lagrange(sample.z, sample.t, 0.0), t_lo, t_hi);
    return EventRecord{t, LocalizationMethod::inverse_lagrange,
                       std::abs(lagrange(sample.t, sample.z, t))};
}

double event_tolerance(double rtol, double h) noexcept { return std::max(1e-9, rtol * h); }

EventRecord fallback_localize(const std::function<double(double)>& z_eval, double t_lo,
                              double t_hi, double event_tol, int max_iterations) {
    double z_lo = z_eval(t_lo);
    double z_hi = z_eval(t_hi);
    if (!(z_lo < 0.0 && z_hi >= 0.0)) {
        throw LocalizationError("fallback_localize: no sign change on [" + std::to_string(t_lo) +
                                ", " + std::to_string(t_hi) + "] (z = " + std::to_string(z_lo) +
                                ", " + std::to_string(z_hi) + ")");
    }
    if (z_hi == 0.0) {
        return EventRecord{t_hi, LocalizationMethod::fallback_bisection, 0.0};
    }
    int same_side = 0;  // consecutive secant updates keeping the same endpoint
    int last_side = 0;
    for (int iter = 0; iter < max_iterations; ++iter) {
        if (t_hi - t_lo < event_tol) {
            return EventRecord{t_hi, LocalizationMethod::fallback_bisection, std::abs(z_hi)};
        }
        double t = t_lo - z_lo * (t_hi - t_lo) / (z_hi - z_lo);
        const double width = t_hi - t_lo;
        if (same_side >= 2 || !(t > t_lo + 1e-3 * width && t < t_hi - 1e-3 * width)) {
            t = 0.5 * (t_lo + t_hi);
            same_side = 0;
        }
        const double z = z_eval(t);
        if (!std::isfinite(z)) {
            throw LocalizationError("fallback_localize: dense output is not finite");
        }
        if (z >= 0.0) {
            t_hi = t;
            z_hi = z;
            same_side = last_side == 1 ? same_side + 1 : 1;
            last_side = 1;
            if (z == 0.0) {
                return EventRecord{t_hi, LocalizationMethod::fallback_bisection, 0.0};
            }
        } else {
            t_lo = t;
            z_lo = z;
            same_side = last_side == -1 ? same_side + 1 : 1;
            last_side = -1;
        }
    }
    if (t_hi - t_lo < event_tol) {
        return EventRecord{t_hi, LocalizationMethod::fallback_bisection, std::abs(z_hi)};
    }
    throw LocalizationError("fallback_localize: no convergence within " +
                            std::to_string(max_iterations) + " iterations");
}

EventRecord localize_event(const CrossingSample& sample,
                           const std::function<double(double)>& z_eval, double t_lo, double t_hi,
                           double event_tol) {
    if (sample.z.back() == 0.0) {
        return EventRecord{t_hi, LocalizationMethod::step_endpoint, 0.0};
    }
    auto record = inverse_interpolate(sample, t_lo, t_hi);
    if (!record) {
        return fallback_localize(z_eval, t_lo, t_hi, event_tol);
    }
    // Polish on the dense output with difference-quotient Newton steps,
    // staying inside the step; fall back to the bracketed search if the
    // iteration does not settle within event_tol.
    const double width = t_hi - t_lo;
    double t = record->t_event;
    double z = z_eval(t);
    bool converged = z == 0.0;
    for (int iter = 0; iter < 10 && !converged; ++iter) {
        const double d = (t - t_lo > 0.5 * width ? -1.0 : 1.0) * 1e-7 * width;
        const double slope = (z_eval(t + d) - z) / d;
        if (!(slope > 0.0)) {
            break;
        }
        const double t_new = t - z / slope;
        const double step = std::abs(t_new - t);
        if (!(t_new > t_lo && t_new <= t_hi)) {
            break;
        }
        const double z_new = z_eval(t_new);
        if (!(std::abs(z_new) < std::abs(z))) {
            converged = step <= event_tol;
            break;
        }
        t = t_new;
        z = z_new;
        converged = step <= event_tol || z == 0.0;
    }
    if (!converged) {
        return fallback_localize(z_eval, t_lo, t_hi, event_tol);
    }
    record->t_event = t;
    record->residual = std::abs(z);
    return *record;
}

}  // namespace hybridsim
