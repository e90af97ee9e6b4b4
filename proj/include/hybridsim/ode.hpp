#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

#include "hybridsim/events.hpp"
#include "hybridsim/network.hpp"

namespace hybridsim {

using JacobianFunction = std::function<void(double t, const Vector& y, Matrix& jac)>;

/// y' = f(t, y). Only the leading error_components entries enter the
/// step-size error norm (the hybrid system keeps z in the last slot and
/// leaves it out).
struct OdeSystem {
    std::size_t dimension = 0;
    std::size_t error_components = 0;
    RhsFunction rhs;
    JacobianFunction jacobian;  // empty: forward differences
};

/// Tolerances and step controls shared by both integrators.
struct IntegratorOptions {
    double rtol = 1e-3;
    double atol = 1e-6;
    double h_min = 1e-12;
    double h_max = std::numeric_limits<double>::infinity();
    double h_init = 0.0;  // 0: automatic
    double safety = 0.9;
    double newton_tol = 0.0;  // 0: max(10 eps / rtol, min(0.03, sqrt(rtol)))
    int max_newton_iters = 0;  // 0: solver default (7 Radau, 4 BDF)
    int max_jacobian_age = 20;
    double fd_increment = 1.4901161193847656e-08;  // sqrt(eps)
    bool fixed_step = false;  // take h_init unconditionally
    int fixed_order = 0;  // BDF only; 0 selects adaptively
    int max_order = 5;  // BDF only
};

struct SolverCounters {
    std::uint64_t steps_accepted = 0;
    std::uint64_t steps_rejected = 0;
    std::uint64_t newton_iters = 0;
    std::uint64_t newton_failures = 0;
    std::uint64_t rhs_evals = 0;
    std::uint64_t jacobian_evals = 0;
    std::uint64_t lu_factorizations = 0;
    std::uint64_t restarts = 0;
    std::array<std::uint64_t, 6> order_histogram{};  // BDF accepted steps per order (index = q)
    std::uint64_t post_restart_steps = 0;  // first accepted step after a restart
    std::uint64_t post_restart_order1 = 0;  // ... of which taken at order 1

    SolverCounters& operator+=(const SolverCounters& o);
};

/// Outcome of one step attempt.
enum class AttemptStatus { accepted, rejected, newton_failed };

/// Integration failure with the state at which it happened.
class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string& what, double t, double h, Vector y);
    [[nodiscard]] double t() const noexcept { return t_; }
    [[nodiscard]] double h() const noexcept { return h_; }
    [[nodiscard]] const Vector& y() const noexcept { return y_; }

private:
    double t_;
    double h_;
    Vector y_;
};

/// Common surface of the one-step and multistep integrators, as used by the
/// hybrid driver: take accepted steps, query dense output inside the last
/// step, restart after a discontinuity.
class Integrator {
public:
    virtual ~Integrator() = default;

    /// Fresh start at (t, y); not counted as a restart.
    virtual void initialize(double t, const Vector& y) = 0;
    /// Restart after a discontinuity (counted).
    virtual void restart(double t, const Vector& y) = 0;
    /// One accepted step ending at or before t_stop. Throws IntegrationError.
    virtual void step(double t_stop) = 0;

    [[nodiscard]] virtual double time() const = 0;
    [[nodiscard]] virtual const Vector& state() const = 0;
    /// Start of the last accepted step.
    [[nodiscard]] virtual double step_start() const = 0;
    /// Dense output, valid on [step_start(), time()].
    [[nodiscard]] virtual Vector dense_output(double t) const = 0;
    [[nodiscard]] virtual double dense_component(double t, std::size_t i) const = 0;
    /// (t, y_i) pairs the last step exposes for event localization.
    [[nodiscard]] virtual CrossingSample crossing_sample(std::size_t component) const = 0;

    [[nodiscard]] virtual const SolverCounters& counters() const = 0;
    [[nodiscard]] virtual const IntegratorOptions& options() const = 0;
};

/// Callback after each accepted step; return false to stop.
using StepCallback = std::function<bool(const Integrator&)>;

/// Steps until t_stop or until the callback stops it. Returns the number of
/// accepted steps.
std::uint64_t advance(Integrator& integrator, double t_stop, const StepCallback& on_step = {});

namespace detail {

/// RMS over the first `count` entries of err / (atol + rtol * max(|y0|, |y1|)).
[[nodiscard]] double scaled_rms(const Vector& err, const Vector& y0, const Vector& y1,
                                std::size_t count, double rtol, double atol);

[[nodiscard]] double default_newton_tol(double rtol);

/// Initial step: h0 = min(h_max, 1e-3 * max(1, span)) refined by one
/// explicit Euler trial as h = min(100 h0, (0.01 / max(|f0|, |f1 - f0| / h0))^(1/(order+1))).
[[nodiscard]] double initial_step(const OdeSystem& sys, const IntegratorOptions& opt, double t,
                                  const Vector& y, const Vector& f0, double t_stop, int order,
                                  std::uint64_t& rhs_evals);

}  // namespace detail

}  // namespace hybridsim
