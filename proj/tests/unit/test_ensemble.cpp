#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "hybridsim/ensemble.hpp"
#include "hybridsim/models.hpp"
#include "hybridsim/netdsl.hpp"
#include "hybridsim/report.hpp"

using namespace hybridsim;

namespace {

EnsembleSpec spec(EnsembleMethod m, std::size_t runs, double t_final, std::uint64_t seed) {
    EnsembleSpec s;
    s.method = m;
    s.runs = runs;
    s.t_final = t_final;
    s.seed = seed;
    return s;
}

}  // namespace

TEST_CASE("method names") {
    CHECK(parse_ensemble_method("ssa") == EnsembleMethod::ssa);
    CHECK(to_string(EnsembleMethod::irk) == "irk");
    CHECK_THROWS_AS((void)parse_ensemble_method("euler"), std::invalid_argument);
}

TEST_CASE("single run reports zero standard deviation") {
    const auto net = build_toy();
    const EnsembleReport r = run_ensemble(net, spec(EnsembleMethod::irk, 1, 50.0, 3), "toy");
    REQUIRE(r.sd_firings.size() == 1);
    CHECK(r.sd_firings[0] == 0.0);
    CHECK(r.runs == 1);
    CHECK(r.model == "toy");
    CHECK(r.slow_reactions == std::vector<std::string>{"R3"});
    CHECK(r.mean_firings[0] == static_cast<double>(run_single(net, spec(EnsembleMethod::irk, 1, 50.0, 3), 0).firing_counts[0]));
}

TEST_CASE("runs are reproducible and independent of the thread count") {
    const auto net = build_gene({"gene", 1e-1, {}});
    EnsembleSpec s = spec(EnsembleMethod::bdf, 6, 20.0, 42);
    s.keep_runs = true;
    const EnsembleReport one = run_ensemble(net, s, "gene", 0.1);
    s.threads = 3;
    const EnsembleReport three = run_ensemble(net, s, "gene", 0.1);
    CHECK(ensemble_csv({one}) == ensemble_csv({three}));
    for (std::size_t i = 0; i < s.runs; ++i) {
        CHECK(one.run_results[i].firing_counts == run_single(net, s, i).firing_counts);
    }
    CHECK(one.total_counters.restarts == static_cast<std::uint64_t>(std::llround(
                                             (one.mean_firings[0] + one.mean_firings[1]) * 6.0)));
}

TEST_CASE("failures carry the run index and stream id") {
    const auto net = load_model({"species A = 1\nparam k = 1\n"
                                 "reaction r: 0 -> A @ expr(k / (A - 1)) partition=ssa\n",
                                 "bad"});
    try {
        (void)run_ensemble(net, spec(EnsembleMethod::irk, 4, 1.0, 1));
        FAIL("expected EnsembleError");
    } catch (const EnsembleError& e) {
        CHECK(e.run_index() == 0);
        CHECK(e.stream_id() == 0);
    }
    CHECK_THROWS_AS((void)run_ensemble(net, spec(EnsembleMethod::irk, 0, 1.0, 1)), std::invalid_argument);
}

TEST_CASE("toy k2 = 1e-2: IRK ensemble agrees with the SSA oracle") {
    const auto net = build_toy();
    const EnsembleReport irk = run_ensemble(net, spec(EnsembleMethod::irk, 1000, 200.0, 1), "toy");
    const EnsembleReport ssa = run_ensemble(net, spec(EnsembleMethod::ssa, 1000, 200.0, 1), "toy");
    const double se = std::sqrt((irk.sd_firings[0] * irk.sd_firings[0] + ssa.sd_firings[0] * ssa.sd_firings[0]) / 1000.0);
    CHECK(std::abs(irk.mean_firings[0] - ssa.mean_firings[0]) <= 3.0 * se);
    // First-order network: the SSA mean obeys the linear ODE exactly, so the
    // expected R3 count is 10000 - (S1 + S2)(200) from its eigen-solution.
    Eigen::Matrix2d a;
    a << -0.5, 1.5, 0.5, -1.5 - 1e-2;
    const Eigen::EigenSolver<Eigen::Matrix2d> es(a);
    const Eigen::Matrix2d v = es.eigenvectors().real();
    const Eigen::Vector2d lam = es.eigenvalues().real();
    const Eigen::Vector2d coef = v.inverse() * Eigen::Vector2d(7500.0, 2500.0);
    const Eigen::Vector2d x = v * Eigen::Vector2d(coef[0] * std::exp(lam[0] * 200.0), coef[1] * std::exp(lam[1] * 200.0));
    const double expected = 10000.0 - x.sum();
    CHECK(std::abs(ssa.mean_firings[0] - expected) <= 3.0 * ssa.sd_firings[0] / std::sqrt(1000.0));
}
