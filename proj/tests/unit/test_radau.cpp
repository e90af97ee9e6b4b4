#include <doctest.h>

#include <cmath>
#include <vector>

#include "hybridsim/convergence.hpp"
#include "hybridsim/hybrid.hpp"
#include "hybridsim/models.hpp"
#include "hybridsim/radau.hpp"

using namespace hybridsim;

namespace {

OdeSystem scalar(std::function<double(double, double)> f) {
    OdeSystem sys;
    sys.dimension = 1;
    sys.error_components = 1;
    sys.rhs = [f](double t, const Vector& y, Vector& dy) { dy[0] = f(t, y[0]); };
    return sys;
}

Vector vec1(double v) {
    Vector y(1);
    y[0] = v;
    return y;
}

IntegratorOptions tight() {
    IntegratorOptions o;
    o.rtol = 1e-10;
    o.atol = 1e-12;
    o.newton_tol = 1e-12;
    o.max_newton_iters = 10;
    return o;
}

// Lagrange basis on three nodes evaluated at s.
double lagrange(const std::array<double, 3>& c, std::size_t i, double s) {
    double v = 1.0;
    for (std::size_t j = 0; j < 3; ++j) {
        if (j != i) {
            v *= (s - c[j]) / (c[i] - c[j]);
        }
    }
    return v;
}

}  // namespace

TEST_CASE("tableau invariants") {
    const auto& tb = radau_iia_tableau();
    CHECK(tb.c[2] == 1.0);
    double sb = 0.0;
    double sbc = 0.0;
    double sbc2 = 0.0;
    for (std::size_t j = 0; j < 3; ++j) {
        CHECK(std::abs(tb.a[2][j] - tb.b[j]) < 1e-14);
        sb += tb.b[j];
        sbc += tb.b[j] * tb.c[j];
        sbc2 += tb.b[j] * tb.c[j] * tb.c[j];
    }
    CHECK(std::abs(sb - 1.0) < 1e-14);
    CHECK(std::abs(sbc - 0.5) < 1e-14);
    CHECK(std::abs(sbc2 - 1.0 / 3.0) < 1e-14);
    for (std::size_t i = 0; i < 3; ++i) {
        for (int k = 1; k <= 3; ++k) {
            double lhs = 0.0;
            for (std::size_t j = 0; j < 3; ++j) {
                lhs += tb.a[i][j] * std::pow(tb.c[j], k - 1);
            }
            CHECK(std::abs(lhs - std::pow(tb.c[i], k) / k) < 1e-14);
        }
    }
    CHECK(std::abs(tb.c[0] - (4.0 - std::sqrt(6.0)) / 10.0) < 1e-15);
    CHECK(std::abs(tb.c[1] - (4.0 + std::sqrt(6.0)) / 10.0) < 1e-15);
}

TEST_CASE("zero right-hand side is the identity flow") {
    RadauSolver s(scalar([](double, double) { return 0.0; }), {});
    s.initialize(0.0, vec1(3.0));
    const IrkAttempt a = s.attempt_step(0.5);
    REQUIRE(a.status == AttemptStatus::accepted);
    for (const auto& g : a.stages.g) {
        CHECK(g[0] == 3.0);
    }
    CHECK(a.err <= 1e-10);
}

TEST_CASE("quadrature of 5 t^4 and the collocation polynomial") {
    RadauSolver s(scalar([](double t, double) { return 5.0 * std::pow(t, 4); }), tight());
    s.initialize(0.0, vec1(0.0));
    const IrkAttempt a = s.attempt_step(1.0);
    REQUIRE(a.status != AttemptStatus::newton_failed);
    CHECK(std::abs(a.stages.g[2][0] - 1.0) < 1e-12);

    CHECK(collocation_value(a.stages, 1.0)[0] == a.stages.g[2][0]);
    const auto& c = radau_iia_tableau().c;
    CHECK(std::abs(collocation_value(a.stages, c[0])[0] - a.stages.g[0][0]) < 1e-14);

    // The collocation polynomial is the integral of the quadratic that
    // interpolates 5 s^4 at the nodes; Simpson's rule is exact on it.
    auto p = [&](double s_) {
        double v = 0.0;
        for (std::size_t i = 0; i < 3; ++i) {
            v += lagrange(c, i, s_) * 5.0 * std::pow(c[i], 4);
        }
        return v;
    };
    const double expected = 0.5 / 6.0 * (p(0.0) + 4.0 * p(0.25) + p(0.5));
    CHECK(std::abs(collocation_value(a.stages, 0.5)[0] - expected) < 1e-12);
    CHECK(std::abs(expected - std::pow(0.5, 5)) > 1e-4);
}

TEST_CASE("single step on y' = -y has sixth-order local error") {
    auto local_error = [](double h) {
        RadauSolver s(scalar([](double, double y) { return -y; }), tight());
        s.initialize(0.0, vec1(1.0));
        const IrkAttempt a = s.attempt_step(h);
        return std::abs(a.stages.g[2][0] - std::exp(-h));
    };
    const double e1 = local_error(0.4);
    const double e2 = local_error(0.2);
    CHECK(std::log2(e1 / e2) == doctest::Approx(6.0).epsilon(0.05));
    CHECK(local_error(0.1) < 1e-9);
}

TEST_CASE("global order on y' = -y with fixed steps") {
    const ErrorOrderReport r = run_convergence({StudyKind::irk_order, 0, {0.1, 0.05, 0.025}});
    for (std::size_t i = 1; i < r.errors.size(); ++i) {
        const double ratio = std::log2(r.errors[i - 1] / r.errors[i]);
        CHECK(ratio >= 4.5);
        CHECK(ratio <= 5.5);
    }
}

TEST_CASE("toy fast subsystem relaxes to 2500") {
    const auto net = build_toy();
    IntegratorOptions o;
    o.rtol = 1e-6;
    o.atol = 1e-6;
    OdeSystem sys = augmented_system(net);
    RadauSolver s(sys, o);
    Vector y(4);
    y << 10000.0, 0.0, 0.0, -1e9;
    s.initialize(0.0, y);
    advance(s, 20.0);
    CHECK(s.time() == 20.0);
    const double exact = 2500.0 * (1.0 - std::exp(-40.0));
    CHECK(std::abs(s.state()[1] - exact) <= o.rtol * exact);
    CHECK(std::abs(s.state()[0] + s.state()[1] - 10000.0) <= 10.0 * o.rtol * 10000.0);
}

TEST_CASE("zero-width advance takes no steps") {
    RadauSolver s(scalar([](double, double y) { return -y; }), {});
    s.initialize(1.0, vec1(2.0));
    CHECK(advance(s, 1.0) == 0);
    CHECK(s.state()[0] == 2.0);
}

TEST_CASE("stiff scalar problem with solution cos t") {
    IntegratorOptions o;
    o.rtol = 1e-6;
    o.atol = 1e-9;
    RadauSolver s(scalar([](double t, double y) { return -1e4 * (y - std::cos(t)) - std::sin(t); }), o);
    s.initialize(0.0, vec1(1.0));
    double worst = 0.0;
    advance(s, 1.0, [&](const Integrator& it) {
        worst = std::max(worst, std::abs(it.state()[0] - std::cos(it.time())));
        return true;
    });
    CHECK(s.time() == 1.0);
    CHECK(worst <= 10.0 * o.rtol);
    CHECK(s.counters().steps_accepted < 1000);
}

TEST_CASE("z slot never enters the error norm") {
    auto steps = [](double factor) {
        const auto net = build_model({"toy", 1.0, {{"k2", 1e-2 * factor}}});
        RadauSolver s(augmented_system(net), {});
        Vector y = net.initial_amounts();
        Vector full(4);
        full << y[0], y[1], y[2], -1.0;
        s.initialize(0.0, full);
        advance(s, 200.0);
        return s.counters();
    };
    const SolverCounters a = steps(1.0);
    const SolverCounters b = steps(1e6);
    CHECK(a.steps_accepted == b.steps_accepted);
    CHECK(a.steps_rejected == b.steps_rejected);
}

TEST_CASE("linear conservation on the toy fast subsystem") {
    const auto net = build_toy();
    IntegratorOptions o;
    RadauSolver s(augmented_system(net), o);
    Vector y(4);
    y << 7500.0, 2500.0, 0.0, -1e30;
    s.initialize(0.0, y);
    double drift = 0.0;
    advance(s, 200.0, [&](const Integrator& it) {
        drift = std::max(drift, std::abs(it.state()[0] + it.state()[1] - 10000.0));
        return true;
    });
    CHECK(drift < 10.0 * o.rtol * 10000.0);
}

TEST_CASE("restart refreshes the Jacobian and is counted") {
    const auto net = build_toy();
    RadauSolver s(augmented_system(net), {});
    Vector y(4);
    y << 7500.0, 2500.0, 0.0, -5.0;
    s.initialize(0.0, y);
    advance(s, 1.0);
    const auto before = s.counters().jacobian_evals;
    s.restart(s.time(), s.state());
    s.step(2.0);
    CHECK(s.counters().restarts == 1);
    CHECK(s.counters().jacobian_evals >= before + 1);
}
