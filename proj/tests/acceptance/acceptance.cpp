// Acceptance checks; prints one PASS/FAIL line per criterion and exits
// nonzero if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "hybridsim/convergence.hpp"
#include "hybridsim/ensemble.hpp"
#include "hybridsim/hybrid.hpp"
#include "hybridsim/models.hpp"
#include "hybridsim/netdsl.hpp"
#include "hybridsim/report.hpp"
#include "stats.hpp"

using namespace hybridsim;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

unsigned worker_threads() {
    return std::max(1u, std::thread::hardware_concurrency());
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

testing::MeanSe report_mean_se(const EnsembleReport& r, std::size_t reaction) {
    const double n = static_cast<double>(r.runs);
    return {r.mean_firings[reaction], r.sd_firings[reaction], r.sd_firings[reaction] / std::sqrt(n)};
}

EnsembleSpec make_spec(EnsembleMethod m, std::size_t runs, double t_final, std::uint64_t seed) {
    EnsembleSpec s;
    s.method = m;
    s.runs = runs;
    s.t_final = t_final;
    s.seed = seed;
    s.threads = worker_threads();
    return s;
}

// Mean R3 firings of irk, bdf and ssa agree pairwise within 3 combined SE.
Outcome cross_solver_accuracy() {
    Outcome out{true, ""};
    for (double k2 : {1e-4, 1e-3, 1e-2}) {
        const auto net = build_model({"toy", 1.0, {{"k2", k2}}});
        const std::size_t r3 = 0;
        const auto irk = report_mean_se(run_ensemble(net, make_spec(EnsembleMethod::irk, 1000, 200.0, 101)), r3);
        const auto bdf = report_mean_se(run_ensemble(net, make_spec(EnsembleMethod::bdf, 1000, 200.0, 202)), r3);
        const auto ssa = report_mean_se(run_ensemble(net, make_spec(EnsembleMethod::ssa, 1000, 200.0, 303)), r3);
        const double z1 = testing::combined_z(irk, bdf);
        const double z2 = testing::combined_z(irk, ssa);
        const double z3 = testing::combined_z(bdf, ssa);
        out.pass = out.pass && z1 <= 3.0 && z2 <= 3.0 && z3 <= 3.0;
        out.detail += fmt("k2=%g", k2) + fmt(" irk=%.3f", irk.mean) + fmt(" bdf=%.3f", bdf.mean) +
                      fmt(" ssa=%.3f", ssa.mean) + fmt(" z=(%.2f", z1) + fmt(",%.2f", z2) + fmt(",%.2f); ", z3);
    }
    return out;
}

// Constant rate A = 2: 10^4 inter-event times pass KS at 1%.
Outcome event_time_exactness() {
    const auto net = load_model({"species B = 0\nparam A = 2\nreaction s: 0 -> B @ mass_action(A) partition=ssa\n", "constant"});
    Outcome out{true, ""};
    for (auto kind : {SolverKind::irk, SolverKind::bdf}) {
        HybridOptions o;
        o.solver = kind;
        HybridSimulator sim(net, o);
        sim.reset(net.initial_state());
        RngStream stream(2, 0);
        std::vector<double> gaps;
        double prev = 0.0;
        while (gaps.size() < 10000) {
            const double r1 = stream.next_uniform();
            const double r2 = stream.next_uniform();
            const CycleOutcome c = sim.cycle(1e9, r1, r2);
            if (c.kind != CycleOutcome::Kind::event) {
                break;
            }
            gaps.push_back(sim.state().t - prev);
            prev = sim.state().t;
        }
        const double d = testing::ks_exponential(gaps, 2.0);
        const double crit = testing::ks_critical(gaps.size(), 0.01);
        out.pass = out.pass && gaps.size() == 10000 && d < crit;
        out.detail += std::string(to_string(kind)) + fmt(" D=%.5f", d) + fmt(" (crit %.5f); ", crit);
    }
    return out;
}

// a_tot = 1 + t with r1 = e^-1: event at sqrt(3) - 1.
Outcome time_varying_closed_form() {
    const auto net = load_model({"species X = 1\nspecies B = 0\nparam one = 1\nparam k = 1\n"
                                 "reaction grow: 0 -> X @ mass_action(one) partition=ode\n"
                                 "reaction s: 0 -> B @ expr(k * X) partition=ssa\n",
                                 "ramp"});
    const double exact = std::sqrt(3.0) - 1.0;
    auto event_time = [&](SolverKind kind) {
        HybridOptions o;
        o.solver = kind;
        HybridSimulator sim(net, o);
        sim.reset(net.initial_state());
        (void)sim.cycle(10.0, std::exp(-1.0), 0.5);
        return sim.state().t;
    };
    const double irk = std::abs(event_time(SolverKind::irk) - exact);
    const double bdf = std::abs(event_time(SolverKind::bdf) - exact);
    return {irk <= 1e-6, fmt("irk |tau - (sqrt3-1)| = %.3e", irk) + fmt(" (bdf, not asserted: %.3e)", bdf)};
}

// Fixed-step slopes on y' = -y.
Outcome solver_order() {
    const std::vector<double> h{0.1, 0.05, 0.025, 0.0125};
    const double irk = run_convergence({StudyKind::irk_order, 0, h}).slope;
    const double b1 = run_convergence({StudyKind::bdf_order, 1, h}).slope;
    const double b2 = run_convergence({StudyKind::bdf_order, 2, h}).slope;
    const bool pass = irk >= 4.5 && irk <= 5.5 && b1 >= 0.7 && b1 <= 1.3 && b2 >= 1.7 && b2 <= 2.3;
    return {pass, fmt("irk %.3f", irk) + fmt(", bdf1 %.3f", b1) + fmt(", bdf2 %.3f", b2)};
}

// Inverse-interpolation localization order.
Outcome event_order() {
    const double irk = run_convergence({StudyKind::irk_event_order, 0, {0.2, 0.1, 0.05, 0.025}}).slope;
    const double bdf = run_convergence({StudyKind::bdf_event_order, 2, {0.2, 0.1, 0.05, 0.025}}).slope;
    return {irk >= 2.7 && bdf >= 1.7, fmt("irk %.3f", irk) + fmt(", bdf q=2 %.3f", bdf)};
}

double max_relative_drift(const HybridRunResult& r, const std::vector<std::size_t>& idx, double total) {
    double worst = 0.0;
    auto check = [&](const Vector& x) {
        double s = 0.0;
        for (auto i : idx) {
            s += x[static_cast<Eigen::Index>(i)];
        }
        worst = std::max(worst, std::abs(s - total) / total);
    };
    for (const auto& x : r.samples) {
        check(x);
    }
    check(r.final_state.x);
    return worst;
}

std::vector<double> unit_grid(double t_final) {
    std::vector<double> ts;
    for (int i = 0; i <= static_cast<int>(t_final); ++i) {
        ts.push_back(i);
    }
    return ts;
}

// Conservation sums drift less than 10 rtol over the run.
Outcome conservation() {
    Outcome out{true, ""};
    const double rtol = IntegratorOptions{}.rtol;
    const auto toy = build_toy();
    const auto gene = build_gene();
    auto ids = [&](const ReactionNetwork& net, std::initializer_list<const char*> names) {
        std::vector<std::size_t> v;
        for (auto n : names) {
            v.push_back(net.find_species(n));
        }
        return v;
    };
    for (auto kind : {SolverKind::irk, SolverKind::bdf}) {
        HybridOptions o;
        o.solver = kind;
        o.sample_times = unit_grid(200.0);
        RngStream s1(6, 0);
        const auto rt = hybrid_simulate(toy, 200.0, o, s1);
        const double d_toy = max_relative_drift(rt, ids(toy, {"S1", "S2", "S3"}), 10000.0);
        RngStream s2(6, 1);
        const auto rg = hybrid_simulate(gene, 200.0, o, s2);
        const double d_g = max_relative_drift(rg, ids(gene, {"g", "gi"}), 1.0);
        const double d_e = max_relative_drift(rg, ids(gene, {"E", "Ep", "Ep2"}), 100.0);
        out.pass = out.pass && d_toy <= 10 * rtol && d_g <= 10 * rtol && d_e <= 10 * rtol &&
                   rt.total_firings() > 0 && rg.total_firings() > 0;
        out.detail += std::string(to_string(kind)) + fmt(": toy %.2e", d_toy) + fmt(", g+gi %.2e", d_g) +
                      fmt(", E+Ep+Ep2 %.2e; ", d_e);
    }
    return out;
}

// Peaks separated by swings larger than `band` in both directions.
int count_peaks(const std::vector<double>& v, double band) {
    int peaks = 0;
    bool rising = true;
    double extreme = v.front();  // running max while rising, min while falling
    double trough = v.front();
    for (double x : v) {
        if (rising) {
            if (x > extreme) {
                extreme = x;
            } else if (extreme - x > band && extreme - trough > band) {
                ++peaks;
                rising = false;
                extreme = x;
            } else if (x < trough) {
                trough = x;
                extreme = x;
            }
        } else {
            if (x < extreme) {
                extreme = x;
            } else if (x - extreme > band) {
                rising = true;
                trough = extreme;
                extreme = x;
            }
        }
    }
    return peaks;
}

// Gene model at c = 1 oscillates in total protein.
Outcome gene_oscillation() {
    const auto net = build_gene();
    HybridOptions o;
    o.sample_times = unit_grid(2000.0);
    RngStream stream(7, 0);
    const auto r = hybrid_simulate(net, 2000.0, o, stream);
    const auto p = static_cast<Eigen::Index>(net.find_species("p"));
    const auto p2 = static_cast<Eigen::Index>(net.find_species("p2"));
    std::vector<double> total;
    for (const auto& x : r.samples) {
        total.push_back(x[p] + 2.0 * x[p2]);
    }
    double mean = 0.0;
    for (double v : total) {
        mean += v;
    }
    mean /= static_cast<double>(total.size());
    const int peaks = count_peaks(total, 0.2 * mean);
    return {peaks >= 3 && total.size() == 2001, fmt("%g peaks", peaks) + fmt(" above 20%% of mean %.1f", mean)};
}

// BDF restarts equal firings; post-restart steps are order 1; IRK refreshes
// its Jacobian on every restart.
Outcome restart_bookkeeping() {
    Outcome out{true, ""};
    for (double c : {1e-2, 1.0}) {
        const auto net = build_gene({"gene", c, {}});
        HybridOptions ob;
        ob.solver = SolverKind::bdf;
        RngStream s1(8, 0);
        const auto b = hybrid_simulate(net, 2000.0, ob, s1);
        HybridOptions oi;
        RngStream s2(8, 1);
        const auto i = hybrid_simulate(net, 2000.0, oi, s2);
        const auto& bc = b.counters;
        const bool ok = bc.restarts == b.total_firings() && bc.post_restart_order1 == bc.post_restart_steps &&
                        bc.post_restart_steps + 1 >= bc.restarts && b.total_firings() > 0 &&
                        i.counters.jacobian_evals >= i.counters.restarts && i.counters.restarts > 0;
        out.pass = out.pass && ok;
        out.detail += fmt("c=%g: bdf restarts ", c) + fmt("%g", static_cast<double>(bc.restarts)) +
                      fmt(" firings %g", static_cast<double>(b.total_firings())) +
                      fmt(" post-restart order1 %g", static_cast<double>(bc.post_restart_order1)) +
                      fmt("/%g", static_cast<double>(bc.post_restart_steps)) +
                      fmt(", irk jac %g", static_cast<double>(i.counters.jacobian_evals)) +
                      fmt(" restarts %g; ", static_cast<double>(i.counters.restarts));
    }
    return out;
}

// IRK Jacobian evaluations per time unit grow with c on the cell cycle model.
Outcome cellcycle_trend() {
    const double t_final = 200.0;
    std::vector<double> rates;
    std::string detail;
    for (double c : {1e-2, 1e-1, 1.0}) {
        const auto net = build_cellcycle({"cellcycle", c, {}});
        const auto r = run_ensemble(net, make_spec(EnsembleMethod::irk, 20, t_final, 9));
        rates.push_back(static_cast<double>(r.total_counters.jacobian_evals) / (20.0 * t_final));
        detail += fmt("c=%g: ", c) + fmt("%.3f jac/time; ", rates.back());
    }
    return {rates[0] < rates[1] && rates[1] < rates[2], detail};
}

// Same seed, same bytes.
Outcome determinism() {
    bool pass = true;
    for (auto m : {EnsembleMethod::irk, EnsembleMethod::bdf, EnsembleMethod::ssa}) {
        const auto net = build_model({"toy", 1.0, {{"k2", 1e-2}}});
        EnsembleSpec s = make_spec(m, 16, 50.0, 1234);
        const std::string a = ensemble_csv({run_ensemble(net, s, "toy")});
        s.threads = 1;
        const std::string b = ensemble_csv({run_ensemble(net, s, "toy")});
        pass = pass && a == b;
    }
    const auto gene = build_gene({"gene", 0.1, {}});
    const EnsembleSpec gs = make_spec(EnsembleMethod::bdf, 8, 50.0, 77);
    pass = pass && ensemble_csv({run_ensemble(gene, gs, "gene")}) == ensemble_csv({run_ensemble(gene, gs, "gene")});
    return {pass, "toy irk/bdf/ssa and gene bdf ensembles compared byte for byte"};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"cross-solver accuracy", cross_solver_accuracy},
        {"event-time exactness", event_time_exactness},
        {"time-varying event closed form", time_varying_closed_form},
        {"solver order", solver_order},
        {"inverse-interpolation order", event_order},
        {"conservation", conservation},
        {"gene-model oscillation", gene_oscillation},
        {"restart bookkeeping", restart_bookkeeping},
        {"cell cycle counter trend", cellcycle_trend},
        {"determinism", determinism},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("criterion %zu (%s): %s  %s [%.1f s]\n", i + 1, criteria[i].first, o.pass ? "PASS" : "FAIL",
                    o.detail.c_str(), secs);
        std::fflush(stdout);
        failures += o.pass ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}
