#include "hybridsim/ssa.hpp"

#include <cmath>
#include <stdexcept>

namespace hybridsim {

namespace {

double fill_propensities(const ReactionNetwork& network, std::span<const double> x,
                         std::vector<double>& a) {
    double total = 0.0;
    for (std::size_t j = 0; j < network.reaction_count(); ++j) {
        a[j] = network.rate(j, x);
        total += a[j];
    }
    return total;
}

}  // namespace

std::optional<SsaEvent> ssa_step(const ReactionNetwork& network, std::span<const double> x,
                                 double u_tau, double r_select) {
    std::vector<double> a(network.reaction_count());
    const double total = fill_propensities(network, x, a);
    if (!(total > 0.0)) {
        return std::nullopt;
    }
    return SsaEvent{-std::log(u_tau) / total, select_reaction(a, total, r_select)};
}

std::optional<SsaEvent> ssa_step(const ReactionNetwork& network, std::span<const double> x,
                                 RngStream& stream) {
    const double u_tau = stream.next_uniform();
    const double r = stream.next_uniform();
    return ssa_step(network, x, u_tau, r);
}

SsaTrace ssa_simulate(const ReactionNetwork& network, double t_final, RngStream& stream,
                      bool record_log) {
    return ssa_simulate(network, network.initial_state(), t_final, stream, record_log);
}

SsaTrace ssa_simulate(const ReactionNetwork& network, HybridState state, double t_final,
                      RngStream& stream, bool record_log) {
    if (!(t_final > state.t)) {
        throw std::invalid_argument("ssa_simulate: t_final must exceed the start time");
    }
    SsaTrace trace;
    trace.firing_counts.assign(network.reaction_count(), 0);
    std::vector<double> a(network.reaction_count());
    const auto x = std::span<const double>(state.x.data(), static_cast<std::size_t>(state.x.size()));
    while (true) {
        const double total = fill_propensities(network, x, a);
        if (!(total > 0.0)) {
            break;
        }
        const double tau = -std::log(stream.next_uniform()) / total;
        const double r = stream.next_uniform();
        if (state.t + tau > t_final) {
            break;
        }
        const std::size_t mu = select_reaction(a, total, r);
        state.t += tau;
        apply_state_change(network, state, mu);
        ++trace.firing_counts[mu];
        if (record_log) {
            trace.event_log.push_back({state.t, mu});
        }
    }
    state.t = t_final;
    trace.final_state = std::move(state);
    return trace;
}

}  // namespace hybridsim
