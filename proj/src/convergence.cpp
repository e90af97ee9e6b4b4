#include "hybridsim/convergence.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

#include "hybridsim/bdf.hpp"
#include "hybridsim/events.hpp"
#include "hybridsim/radau.hpp"

namespace hybridsim {

namespace {

const double kEventTime = std::sqrt(3.0) - 1.0;

OdeSystem decay_system() {
    OdeSystem sys;
    sys.dimension = 1;
    sys.error_components = 1;
    sys.rhs = [](double, const Vector& y, Vector& dydt) { dydt[0] = -y[0]; };
    sys.jacobian = [](double, const Vector&, Matrix& j) { j(0, 0) = -1.0; };
    return sys;
}

// x' = 1, z' = x: the event variable of a propensity growing like 1 + t.
OdeSystem ramp_system() {
    OdeSystem sys;
    sys.dimension = 2;
    sys.error_components = 1;
    sys.rhs = [](double, const Vector& y, Vector& dydt) {
        dydt[0] = 1.0;
        dydt[1] = y[0];
    };
    sys.jacobian = [](double, const Vector&, Matrix& j) {
        j.setZero();
        j(1, 0) = 1.0;
    };
    return sys;
}

IntegratorOptions fixed_options(double h, int order) {
    IntegratorOptions o;
    o.rtol = 1e-6;
    o.atol = 1e-10;
    o.newton_tol = 1e-10;
    o.max_newton_iters = 10;
    o.fixed_step = true;
    o.h_init = h;
    o.fixed_order = order;
    return o;
}

double solver_error(StudyKind kind, int order, double h) {
    const double exact = std::exp(-1.0);
    if (kind == StudyKind::irk_order) {
        RadauSolver solver(decay_system(), fixed_options(h, 0));
        solver.initialize(0.0, Vector::Ones(1));
        advance(solver, 1.0);
        return std::abs(solver.state()[0] - exact);
    }
    BdfSolver solver(decay_system(), fixed_options(h, order));
    std::vector<double> ts;
    std::vector<Vector> ys;
    for (int i = 0; i < order; ++i) {
        ts.push_back(i * h);
        ys.push_back(Vector::Constant(1, std::exp(-i * h)));
    }
    solver.seed_history(ts, ys);
    advance(solver, 1.0);
    return std::abs(solver.state()[0] - exact);
}

double event_error(StudyKind kind, int order, double h) {
    Vector y0(2);
    y0 << 1.0, -1.0;
    std::unique_ptr<Integrator> solver;
    if (kind == StudyKind::irk_event_order) {
        solver = std::make_unique<RadauSolver>(ramp_system(), fixed_options(h, 0));
    } else {
        solver = std::make_unique<BdfSolver>(ramp_system(), fixed_options(h, order));
    }
    solver->initialize(0.0, y0);
    while (solver->time() < 10.0) {
        solver->step(10.0);
        const CrossingSample sample = solver->crossing_sample(1);
        if (detect_crossing(sample) == CrossingStatus::crossed) {
            const auto rec = inverse_interpolate(sample, solver->step_start(), solver->time());
            if (!rec) {
                throw std::runtime_error("event study: non-monotone crossing sample");
            }
            return std::abs(rec->t_event - kEventTime);
        }
    }
    throw std::runtime_error("event study: no crossing found");
}

}  // namespace

std::string_view to_string(StudyKind kind) noexcept {
    switch (kind) {
    case StudyKind::irk_order:
        return "irk_order";
    case StudyKind::bdf_order:
        return "bdf_order";
    case StudyKind::irk_event_order:
        return "irk_event_order";
    case StudyKind::bdf_event_order:
        return "bdf_event_order";
    }
    return "unknown";
}

StudyKind parse_study_kind(std::string_view name) {
    for (StudyKind k : {StudyKind::irk_order, StudyKind::bdf_order, StudyKind::irk_event_order,
                        StudyKind::bdf_event_order}) {
        if (to_string(k) == name) {
            return k;
        }
    }
    throw std::invalid_argument("unknown study '" + std::string(name) +
                                "' (expected irk_order, bdf_order, irk_event_order or bdf_event_order)");
}

std::vector<double> default_step_sizes(StudyKind kind) {
    if (kind == StudyKind::irk_event_order || kind == StudyKind::bdf_event_order) {
        return {0.2, 0.1, 0.05, 0.025};
    }
    return {0.1, 0.05, 0.025, 0.0125};
}

double fit_loglog_slope(const std::vector<double>& step_sizes, const std::vector<double>& errors) {
    if (step_sizes.size() < 3 || step_sizes.size() != errors.size()) {
        throw std::invalid_argument("fit_loglog_slope: need at least 3 matching points");
    }
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double n = static_cast<double>(step_sizes.size());
    for (std::size_t i = 0; i < step_sizes.size(); ++i) {
        if (!(step_sizes[i] > 0.0) || !(errors[i] > 0.0)) {
            throw std::invalid_argument("fit_loglog_slope: step sizes and errors must be positive");
        }
        const double x = std::log(step_sizes[i]);
        const double y = std::log(errors[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ErrorOrderReport run_convergence(const ConvergenceParams& params) {
    ErrorOrderReport report;
    report.kind = params.kind;
    const bool bdf = params.kind == StudyKind::bdf_order || params.kind == StudyKind::bdf_event_order;
    report.order = bdf ? params.order : 0;
    if (bdf && (params.order < 1 || params.order > kBdfMaxOrder)) {
        throw std::invalid_argument("run_convergence: BDF order must lie in [1, 5]");
    }
    report.step_sizes = params.step_sizes.empty() ? default_step_sizes(params.kind) : params.step_sizes;
    if (report.step_sizes.size() < 3) {
        throw std::invalid_argument("run_convergence: need at least 3 step sizes");
    }
    for (std::size_t i = 0; i < report.step_sizes.size(); ++i) {
        if (!(report.step_sizes[i] > 0.0) || (i > 0 && !(report.step_sizes[i] < report.step_sizes[i - 1]))) {
            throw std::invalid_argument("run_convergence: step sizes must be positive and strictly decreasing");
        }
    }
    for (double h : report.step_sizes) {
        const bool event = params.kind == StudyKind::irk_event_order ||
                           params.kind == StudyKind::bdf_event_order;
        report.errors.push_back(event ? event_error(params.kind, params.order, h)
                                      : solver_error(params.kind, params.order, h));
    }
    report.slope = fit_loglog_slope(report.step_sizes, report.errors);
    return report;
}

}  // namespace hybridsim
