#include "hybridsim/ode.hpp"

#include <algorithm>
#include <cmath>

namespace hybridsim {

SolverCounters& SolverCounters::operator+=(const SolverCounters& o) {
    steps_accepted += o.steps_accepted;
    steps_rejected += o.steps_rejected;
    newton_iters += o.newton_iters;
    newton_failures += o.newton_failures;
    rhs_evals += o.rhs_evals;
    jacobian_evals += o.jacobian_evals;
    lu_factorizations += o.lu_factorizations;
    restarts += o.restarts;
    for (std::size_t i = 0; i < order_histogram.size(); ++i) {
        order_histogram[i] += o.order_histogram[i];
    }
    post_restart_steps += o.post_restart_steps;
    post_restart_order1 += o.post_restart_order1;
    return *this;
}

IntegrationError::IntegrationError(const std::string& what, double t, double h, Vector y)
    : std::runtime_error(what + " at t = " + std::to_string(t) + ", h = " + std::to_string(h)),
      t_(t),
      h_(h),
      y_(std::move(y)) {}

std::uint64_t advance(Integrator& integrator, double t_stop, const StepCallback& on_step) {
    std::uint64_t steps = 0;
    while (integrator.time() < t_stop) {
        integrator.step(t_stop);
        ++steps;
        if (on_step && !on_step(integrator)) {
            break;
        }
    }
    return steps;
}

namespace detail {

double scaled_rms(const Vector& err, const Vector& y0, const Vector& y1, std::size_t count,
                  double rtol, double atol) {
    if (count == 0) {
        return 0.0;
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        const double sc = atol + rtol * std::max(std::abs(y0[k]), std::abs(y1[k]));
        const double r = err[k] / sc;
        sum += r * r;
    }
    return std::sqrt(sum / static_cast<double>(count));
}

double default_newton_tol(double rtol) {
    constexpr double eps = std::numeric_limits<double>::epsilon();
    return std::max(10.0 * eps / rtol, std::min(0.03, std::sqrt(rtol)));
}

double initial_step(const OdeSystem& sys, const IntegratorOptions& opt, double t, const Vector& y,
                    const Vector& f0, double t_stop, int order, std::uint64_t& rhs_evals) {
    const double span = t_stop - t;
    double h0 = std::min(opt.h_max, 1e-3 * std::max(1.0, span));
    h0 = std::min(h0, span);
    const std::size_t m = sys.error_components;
    const double d1 = scaled_rms(f0, y, y, m, opt.rtol, opt.atol);
    Vector y1 = y + h0 * f0;
    Vector f1(y.size());
    sys.rhs(t + h0, y1, f1);
    ++rhs_evals;
    const Vector df = (f1 - f0) / h0;
    const double d2 = scaled_rms(df, y, y, m, opt.rtol, opt.atol);
    const double d = std::max(d1, d2);
    double h = 100.0 * h0;
    if (d > 1e-15) {
        h = std::min(h, std::pow(0.01 / d, 1.0 / (order + 1)));
    }
    h = std::min({h, opt.h_max, span});
    return std::max(h, opt.h_min);
}

}  // namespace detail

}  // namespace hybridsim
