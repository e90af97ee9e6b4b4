#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "hybridsim/hybrid.hpp"
#include "hybridsim/models.hpp"
#include "hybridsim/netdsl.hpp"
#include "hybridsim/ssa.hpp"
#include "stats.hpp"

using namespace hybridsim;

namespace {

ReactionNetwork constant_rate(double a) {
    return load_model({"species B = 0\nparam A = " + format_real(a) +
                           "\nreaction s: 0 -> B @ mass_action(A) partition=ssa\n",
                       "constant"});
}

ReactionNetwork ramp() {
    return load_model({"species X = 1\nspecies B = 0\nparam one = 1\nparam k = 1\n"
                       "reaction grow: 0 -> X @ mass_action(one) partition=ode\n"
                       "reaction s: 0 -> B @ expr(k * X) partition=ssa\n",
                       "ramp"});
}

HybridOptions with_solver(SolverKind kind) {
    HybridOptions o;
    o.solver = kind;
    return o;
}

}  // namespace

TEST_CASE("solver names") {
    CHECK(parse_solver_kind("irk") == SolverKind::irk);
    CHECK(parse_solver_kind("bdf") == SolverKind::bdf);
    CHECK(to_string(SolverKind::bdf) == "bdf");
    CHECK_THROWS_AS((void)parse_solver_kind("rk4"), std::invalid_argument);
}

TEST_CASE("constant rate fires at 1/A") {
    for (auto kind : {SolverKind::irk, SolverKind::bdf}) {
        const auto net = constant_rate(4.0);
        HybridSimulator sim(net, with_solver(kind));
        sim.reset(net.initial_state());
        const CycleOutcome out = sim.cycle(10.0, std::exp(-1.0), 0.5);
        REQUIRE(out.kind == CycleOutcome::Kind::event);
        CHECK(out.fired);
        CHECK(sim.state().t == doctest::Approx(0.25).epsilon(1e-12));
        CHECK(sim.state().x[0] == 1.0);
    }
}

TEST_CASE("empty slow partition integrates to t_final") {
    const auto ode_only = load_model({"species S1 = 7500\nspecies S2 = 2500\nparam k1 = 0.5\nparam km1 = 1.5\n"
                                      "reaction R1: S1 -> S2 @ mass_action(k1) partition=ode\n"
                                      "reaction R2: S2 -> S1 @ mass_action(km1) partition=ode\n",
                                      "ode"});
    HybridSimulator sim(ode_only, {});
    sim.reset(ode_only.initial_state());
    const CycleOutcome out = sim.cycle(5.0, 0.3, 0.3);
    CHECK(out.kind == CycleOutcome::Kind::reached_t_final);
    CHECK(sim.state().t == 5.0);
    CHECK(sim.result().total_firings() == 0);
}

TEST_CASE("zero total propensity gives no firings") {
    const auto net = load_model({"species A = 0\nspecies B = 0\nparam k = 1\n"
                                 "reaction s: A -> B @ mass_action(k) partition=ssa\n",
                                 "dead"});
    for (auto kind : {SolverKind::irk, SolverKind::bdf}) {
        RngStream stream(1, 0);
        const auto r = hybrid_simulate(net, 50.0, with_solver(kind), stream);
        CHECK(r.total_firings() == 0);
        CHECK(r.final_state.t == 50.0);
    }
}

TEST_CASE("equal propensities split at r2 = 0.5") {
    const auto net = load_model({"species A = 0\nspecies B = 0\nparam k = 1\n"
                                 "reaction a: 0 -> A @ mass_action(k) partition=ssa\n"
                                 "reaction b: 0 -> B @ mass_action(k) partition=ssa\n",
                                 "pair"});
    HybridSimulator sim(net, {});
    sim.reset(net.initial_state());
    CHECK(sim.cycle(10.0, 0.5, 0.5 + 1e-9).reaction == 1);
    CHECK(sim.cycle(10.0, 0.5, 0.5 - 1e-9).reaction == 0);
    CHECK(sim.result().firing_counts == std::vector<std::uint64_t>{1, 1});
}

TEST_CASE("time-varying rate: event at sqrt(3) - 1") {
    const double exact = std::sqrt(3.0) - 1.0;
    const auto net = ramp();
    {
        HybridSimulator sim(net, with_solver(SolverKind::irk));
        sim.reset(net.initial_state());
        REQUIRE(sim.cycle(10.0, std::exp(-1.0), 0.5).kind == CycleOutcome::Kind::event);
        CHECK(std::abs(sim.state().t - exact) <= 1e-6);
        CHECK(std::abs(sim.state().x[0] - (1.0 + exact)) <= 1e-5);
    }
    {
        // z is outside the error norm and x is linear, so only h_max bounds
        // the BDF truncation error in z here.
        HybridOptions o = with_solver(SolverKind::bdf);
        o.integrator.h_max = 1e-4;
        HybridSimulator sim(net, o);
        sim.reset(net.initial_state());
        REQUIRE(sim.cycle(10.0, std::exp(-1.0), 0.5).kind == CycleOutcome::Kind::event);
        CHECK(std::abs(sim.state().t - exact) <= 1e-4);
    }
}

TEST_CASE("rejects invalid inputs") {
    const auto net = constant_rate(1.0);
    HybridSimulator sim(net, {});
    sim.reset(net.initial_state());
    CHECK_THROWS_AS((void)sim.cycle(1.0, 0.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS((void)sim.cycle(1.0, 1.0, 0.5), std::invalid_argument);
    RngStream s(1, 0);
    CHECK_THROWS_AS((void)hybrid_simulate(net, 0.0, {}, s), std::invalid_argument);
}

TEST_CASE("constant-rate inter-event times are exponential") {
    const auto net = constant_rate(2.0);
    for (auto kind : {SolverKind::irk, SolverKind::bdf}) {
        HybridOptions o = with_solver(kind);
        o.record_events = true;
        RngStream stream(77, 0);
        const auto r = hybrid_simulate(net, 5100.0, o, stream);
        REQUIRE(r.event_log.size() >= 10000);
        std::vector<double> gaps;
        double prev = 0.0;
        for (std::size_t i = 0; i < 10000; ++i) {
            gaps.push_back(r.event_log[i].event.t_event - prev);
            prev = r.event_log[i].event.t_event;
        }
        CHECK(testing::ks_exponential(gaps, 2.0) < testing::ks_critical(gaps.size(), 0.01));
    }
}

TEST_CASE("BDF restarts equal firings; tallies are consistent") {
    const auto net = build_model({"toy", 1.0, {{"k2", 1e-1}}});
    HybridOptions o = with_solver(SolverKind::bdf);
    o.record_events = true;
    RngStream stream(5, 0);
    const auto r = hybrid_simulate(net, 20.0, o, stream);
    CHECK(r.total_firings() > 0);
    CHECK(r.counters.restarts == r.total_firings());
    CHECK(r.event_log.size() == r.total_firings());
    CHECK(r.counters.post_restart_order1 == r.counters.post_restart_steps);
    std::uint64_t localized = 0;
    for (auto c : r.localization_counts) {
        localized += c;
    }
    CHECK(localized == r.total_firings() + r.empty_crossings);
    for (std::size_t i = 1; i < r.event_log.size(); ++i) {
        CHECK(r.event_log[i].event.t_event > r.event_log[i - 1].event.t_event);
    }
    const auto& x = r.final_state.x;
    CHECK(x[0] + x[1] + x[2] == doctest::Approx(10000.0).epsilon(1e-5));
}

TEST_CASE("sample times record the state") {
    const auto net = build_toy();
    HybridOptions o;
    o.sample_times = {0.0, 1.0, 2.5, 10.0};
    RngStream stream(9, 0);
    const auto r = hybrid_simulate(net, 10.0, o, stream);
    REQUIRE(r.sample_t.size() == 4);
    CHECK(r.sample_t == o.sample_times);
    CHECK(r.samples[0][0] == 7500.0);
    for (const auto& s : r.samples) {
        CHECK(s[0] + s[1] + s[2] == doctest::Approx(10000.0).epsilon(1e-5));
    }
}

TEST_CASE("hybrid toy ensemble matches the SSA oracle") {
    const auto net = build_model({"toy", 1.0, {{"k2", 1e-3}}});
    const std::size_t r3 = 2;
    std::vector<double> ssa;
    std::vector<double> irk;
    for (std::uint64_t i = 0; i < 1000; ++i) {
        RngStream a(314, i);
        ssa.push_back(static_cast<double>(ssa_simulate(net, 200.0, a).firing_counts[r3]));
        RngStream b(315, i);
        irk.push_back(static_cast<double>(hybrid_simulate(net, 200.0, {}, b).firing_counts[0]));
    }
    CHECK(testing::combined_z(testing::mean_se(ssa), testing::mean_se(irk)) <= 3.0);
}

TEST_CASE("overshoot bins") {
    CHECK(overshoot_bin(0.0) == 0);
    CHECK(overshoot_bin(5e-7) == 0);
    CHECK(overshoot_bin(1e-6) == 1);
    CHECK(overshoot_bin(1e-3) == 2);
    CHECK(overshoot_bin(0.5) == 3);
    CHECK(overshoot_bin(7.0) == 4);
}
