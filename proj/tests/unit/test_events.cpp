#include <doctest.h>

#include <cmath>

#include "hybridsim/convergence.hpp"
#include "hybridsim/events.hpp"
#include "hybridsim/radau.hpp"

using namespace hybridsim;

namespace {

CrossingSample radau_sample(const std::function<double(double)>& z) {
    const auto& c = radau_iia_tableau().c;
    CrossingSample s;
    for (double t : {0.0, c[0], c[1], c[2]}) {
        s.t.push_back(t);
        s.z.push_back(z(t));
    }
    return s;
}

}  // namespace

TEST_CASE("detect_crossing") {
    CHECK(detect_crossing({{0, 1, 2, 3}, {-1, -0.8, -0.5, -0.1}}) == CrossingStatus::none);
    CHECK(detect_crossing({{0, 1, 2, 3}, {-1, -0.5, 0.2, 0.8}}) == CrossingStatus::crossed);
    CHECK(detect_crossing({{0, 1}, {-1, 0.0}}) == CrossingStatus::crossed);
    CHECK_THROWS_AS((void)detect_crossing({{0, 1}, {0.0, 1.0}}), ContractViolation);
    CHECK_THROWS_AS((void)detect_crossing({{}, {}}), std::invalid_argument);
}

TEST_CASE("endpoint tie fires at the step end") {
    const CrossingSample s{{0.0, 0.5, 1.0}, {-1.0, -0.5, 0.0}};
    const EventRecord r = localize_event(s, [](double t) { return t - 1.0; }, 0.0, 1.0, 1e-9);
    CHECK(r.t_event == 1.0);
    CHECK(r.method == LocalizationMethod::step_endpoint);
}

TEST_CASE("inverse interpolation of a linear z is exact") {
    auto z = [](double t) { return 2.0 * t - 1.0; };
    const auto r = inverse_interpolate(radau_sample(z), 0.0, 1.0);
    REQUIRE(r.has_value());
    CHECK(r->t_event == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(r->method == LocalizationMethod::inverse_lagrange);
}

TEST_CASE("inverse interpolation of t^2 - 1/4 on the Radau nodes") {
    auto z = [](double t) { return t * t - 0.25; };
    const CrossingSample sample = radau_sample(z);
    // T(0) of the cubic through the (z_i, t_i) pairs, built term by term.
    double expected = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        double basis = 1.0;
        for (std::size_t j = 0; j < 4; ++j) {
            if (j != i) {
                basis *= (0.0 - sample.z[j]) / (sample.z[i] - sample.z[j]);
            }
        }
        expected += basis * sample.t[i];
    }
    const auto r = inverse_interpolate(sample, 0.0, 1.0);
    REQUIRE(r.has_value());
    CHECK(r->t_event == doctest::Approx(expected).epsilon(1e-13));
    const double tol = 1e-9;
    const EventRecord polished = localize_event(sample, z, 0.0, 1.0, tol);
    CHECK(std::abs(polished.t_event - 0.5) <= tol);
    CHECK(std::abs(z(polished.t_event)) <= 10.0 * tol * 1.0);
}

TEST_CASE("inverse interpolation error shrinks with the step width") {
    auto z = [](double t) { return t * t - 0.25; };
    auto error = [&](double h) {
        const auto& c = radau_iia_tableau().c;
        const double t0 = 0.5 - 0.3 * h;
        CrossingSample s;
        for (double th : {0.0, c[0], c[1], c[2]}) {
            s.t.push_back(t0 + th * h);
            s.z.push_back(z(t0 + th * h));
        }
        return std::abs(inverse_interpolate(s, t0, t0 + h)->t_event - 0.5);
    };
    CHECK(error(0.1) < 1e-5);
    CHECK(error(0.05) < error(0.1) / 8.0);
}

TEST_CASE("non-monotone sample signals the fallback") {
    const CrossingSample s{{0.0, 0.2, 0.6, 1.0}, {-1.0, -0.8, -0.9, 0.1}};
    CHECK_FALSE(inverse_interpolate(s, 0.0, 1.0).has_value());
    const EventRecord r = localize_event(s, [](double t) { return t - 0.9; }, 0.0, 1.0, 1e-9);
    CHECK(r.method == LocalizationMethod::fallback_bisection);
    CHECK(std::abs(r.t_event - 0.9) < 1e-9);
}

TEST_CASE("fallback localization") {
    const double tol = 1e-9;
    const EventRecord lin = fallback_localize([](double t) { return t - 0.5; }, 0.0, 1.0, tol);
    CHECK(std::abs(lin.t_event - 0.5) <= tol);
    CHECK(lin.method == LocalizationMethod::fallback_bisection);
    const EventRecord s = fallback_localize([](double t) { return std::sin(t) - 0.5; }, 0.0, 1.0, tol);
    CHECK(std::abs(s.t_event - std::asin(0.5)) <= tol);
    CHECK(s.t_event > 0.0);
    CHECK(s.t_event <= 1.0);
}

TEST_CASE("fallback errors") {
    CHECK_THROWS_AS((void)fallback_localize([](double t) { return t + 1.0; }, 0.0, 1.0, 1e-9),
                    LocalizationError);
    int calls = 0;
    auto step = [&](double t) {
        ++calls;
        return t < 0.3 ? -1.0 : 1.0;
    };
    CHECK_THROWS_AS((void)fallback_localize(step, 0.0, 1.0, 1e-300, 50), LocalizationError);
    CHECK(calls <= 52);
}

TEST_CASE("inverse interpolation and fallback agree on smooth samples") {
    auto z = [](double t) { return std::exp(t) - 1.6; };
    const double h = 0.1;
    const double t0 = 0.42;
    const double tol = event_tolerance(1e-3, h);
    const auto& c = radau_iia_tableau().c;
    CrossingSample s;
    for (double th : {0.0, c[0], c[1], c[2]}) {
        s.t.push_back(t0 + th * h);
        s.z.push_back(z(t0 + th * h));
    }
    const auto inv = inverse_interpolate(s, t0, t0 + h);
    REQUIRE(inv.has_value());
    const EventRecord fb = fallback_localize(z, t0, t0 + h, tol);
    CHECK(std::abs(inv->t_event - fb.t_event) <= 5.0 * tol);
    const EventRecord full = localize_event(s, z, t0, t0 + h, tol);
    CHECK(full.method == LocalizationMethod::inverse_lagrange);
    CHECK(std::abs(full.t_event - fb.t_event) <= 5.0 * tol);
}

TEST_CASE("localized event residual is small") {
    const double tol = event_tolerance(1e-6, 1.0);
    auto z = [](double t) { return 3.0 * (t * t + t) - 2.0; };
    const EventRecord r = localize_event(radau_sample(z), z, 0.0, 1.0, tol);
    const double slope = 3.0 * (2.0 * r.t_event + 1.0);
    CHECK(r.t_event > 0.0);
    CHECK(r.t_event <= 1.0);
    CHECK(std::abs(z(r.t_event)) <= 10.0 * tol * slope);
}

TEST_CASE("event tolerance") {
    CHECK(event_tolerance(1e-3, 1.0) == 1e-3);
    CHECK(event_tolerance(1e-12, 1e-3) == 1e-9);
}

TEST_CASE("inverse interpolation error order") {
    const auto irk = run_convergence({StudyKind::irk_event_order, 0, {}});
    CHECK(irk.slope >= 2.7);
    const auto bdf = run_convergence({StudyKind::bdf_event_order, 2, {}});
    CHECK(bdf.slope >= 1.7);
}
