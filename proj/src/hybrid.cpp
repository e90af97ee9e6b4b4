#include "hybridsim/hybrid.hpp"

#include <cmath>
#include <stdexcept>

#include "hybridsim/bdf.hpp"
#include "hybridsim/radau.hpp"

namespace hybridsim {

std::string_view to_string(SolverKind kind) noexcept {
    return kind == SolverKind::irk ? "irk" : "bdf";
}

SolverKind parse_solver_kind(std::string_view name) {
    if (name == "irk") {
        return SolverKind::irk;
    }
    if (name == "bdf") {
        return SolverKind::bdf;
    }
    throw std::invalid_argument("unknown solver '" + std::string(name) + "' (expected irk or bdf)");
}

std::size_t overshoot_bin(double z_end) noexcept {
    if (z_end < 1e-6) {
        return 0;
    }
    if (z_end < 1e-4) {
        return 1;
    }
    if (z_end < 1e-2) {
        return 2;
    }
    if (z_end < 1.0) {
        return 3;
    }
    return 4;
}

std::uint64_t HybridRunResult::total_firings() const noexcept {
    std::uint64_t sum = 0;
    for (auto c : firing_counts) {
        sum += c;
    }
    return sum;
}

OdeSystem augmented_system(const ReactionNetwork& network) {
    OdeSystem sys;
    sys.dimension = network.species_count() + 1;
    sys.error_components = network.species_count();
    sys.rhs = [&network](double, const Vector& y, Vector& dydt) {
        fast_rhs(network, std::span<const double>(y.data(), static_cast<std::size_t>(y.size())),
                 std::span<double>(dydt.data(), static_cast<std::size_t>(dydt.size())));
    };
    return sys;
}

std::unique_ptr<Integrator> make_integrator(SolverKind kind, OdeSystem system,
                                            const IntegratorOptions& options) {
    if (kind == SolverKind::irk) {
        return std::make_unique<RadauSolver>(std::move(system), options);
    }
    return std::make_unique<BdfSolver>(std::move(system), options);
}

HybridSimulator::HybridSimulator(const ReactionNetwork& network, HybridOptions options)
    : network_(&network),
      options_(std::move(options)),
      solver_(make_integrator(options_.solver, augmented_system(network), options_.integrator)),
      n_(network.species_count()) {
    reset(network.initial_state());
}

HybridSimulator::~HybridSimulator() = default;

void HybridSimulator::reset(const HybridState& state) {
    if (state.x.size() != static_cast<Eigen::Index>(n_)) {
        throw std::invalid_argument("HybridSimulator: state has the wrong number of species");
    }
    state_ = state;
    state_.z = 0.0;
    started_ = false;
    tally_ = HybridRunResult{};
    tally_.firing_counts.assign(network_->slow_reactions().size(), 0);
    next_sample_ = 0;
    while (next_sample_ < options_.sample_times.size() &&
           options_.sample_times[next_sample_] < state_.t) {
        ++next_sample_;
    }
}

void HybridSimulator::record_samples(double t_upto) {
    const auto& times = options_.sample_times;
    while (next_sample_ < times.size() && times[next_sample_] <= t_upto) {
        const double ts = times[next_sample_];
        const Vector y = ts >= solver_->time() ? solver_->state() : solver_->dense_output(ts);
        tally_.sample_t.push_back(ts);
        tally_.samples.push_back(y.head(static_cast<Eigen::Index>(n_)));
        ++next_sample_;
    }
}

void HybridSimulator::record_current(double t_upto) {
    const auto& times = options_.sample_times;
    while (next_sample_ < times.size() && times[next_sample_] <= t_upto) {
        tally_.sample_t.push_back(times[next_sample_]);
        tally_.samples.push_back(state_.x);
        ++next_sample_;
    }
}

CycleOutcome HybridSimulator::cycle(double t_final, double r1, double r2) {
    if (!(r1 > 0.0 && r1 < 1.0)) {
        throw std::invalid_argument("cycle: r1 must lie in (0, 1)");
    }
    if (!(state_.t < t_final)) {
        return CycleOutcome{};
    }
    state_.z = std::log(r1);
    Vector y(static_cast<Eigen::Index>(n_ + 1));
    y.head(static_cast<Eigen::Index>(n_)) = state_.x;
    y[static_cast<Eigen::Index>(n_)] = state_.z;
    if (started_) {
        solver_->restart(state_.t, y);
    } else {
        solver_->initialize(state_.t, y);
        started_ = true;
    }
    record_current(state_.t);

    Integrator& solver = *solver_;
    const double rtol = options_.integrator.rtol;
    while (solver.time() < t_final) {
        solver.step(t_final);
        const CrossingSample sample = solver.crossing_sample(n_);
        if (detect_crossing(sample) == CrossingStatus::none) {
            record_samples(solver.time());
            continue;
        }
        const double t_lo = solver.step_start();
        const double t_hi = solver.time();
        const auto z_eval = [&solver, this](double t) { return solver.dense_component(t, n_); };
        const EventRecord event =
            localize_event(sample, z_eval, t_lo, t_hi, event_tolerance(rtol, t_hi - t_lo));
        ++tally_.localization_counts[static_cast<std::size_t>(event.method)];
        const double overshoot = sample.z.back();
        ++tally_.overshoot_histogram[overshoot_bin(overshoot)];

        record_samples(event.t_event);

        const Vector y_event = event.t_event >= t_hi ? solver.state() : solver.dense_output(event.t_event);
        state_.t = event.t_event;
        state_.x = y_event.head(static_cast<Eigen::Index>(n_));
        state_.z = 0.0;
        const Propensities props = evaluate_propensities(*network_, state_);
        CycleOutcome out;
        out.kind = CycleOutcome::Kind::event;
        if (!(props.total > 0.0)) {
            ++tally_.empty_crossings;
            return out;
        }
        const std::size_t mu = select_reaction(props.values, props.total, r2);
        apply_state_change(*network_, state_, network_->slow_reactions()[mu]);
        ++tally_.firing_counts[mu];
        if (options_.record_events) {
            tally_.event_log.push_back(FiringRecord{event, mu, overshoot});
        }
        out.reaction = mu;
        out.fired = true;
        return out;
    }
    state_.t = solver.time();
    state_.x = solver.state().head(static_cast<Eigen::Index>(n_));
    state_.z = solver.state()[static_cast<Eigen::Index>(n_)];
    return CycleOutcome{};
}

HybridRunResult HybridSimulator::result() const {
    HybridRunResult r = tally_;
    r.final_state = state_;
    r.counters = solver_->counters();
    return r;
}

HybridRunResult hybrid_simulate(const ReactionNetwork& network, double t_final,
                                const HybridOptions& options, RngStream& stream) {
    if (!(t_final > 0.0)) {
        throw std::invalid_argument("hybrid_simulate: t_final must be positive");
    }
    HybridSimulator sim(network, options);
    while (sim.state().t < t_final) {
        const double r1 = stream.next_uniform();
        const double r2 = stream.next_uniform();
        if (sim.cycle(t_final, r1, r2).kind == CycleOutcome::Kind::reached_t_final) {
            break;
        }
    }
    return sim.result();
}

}  // namespace hybridsim
