#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hybridsim/network.hpp"
#include "hybridsim/rng.hpp"

namespace hybridsim {

struct SsaEvent {
    double tau = 0.0;
    std::size_t reaction = 0;
};

struct SsaLogEntry {
    double t = 0.0;
    std::size_t reaction = 0;
};

struct SsaTrace {
    std::vector<SsaLogEntry> event_log;  // empty unless requested
    std::vector<std::uint64_t> firing_counts;  // one per network reaction
    HybridState final_state;
};

/// One direct-method step with every reaction treated as stochastic.
/// Returns nullopt when the total propensity is zero.
[[nodiscard]] std::optional<SsaEvent> ssa_step(const ReactionNetwork& network,
                                               std::span<const double> x, RngStream& stream);

/// Same step with explicit uniforms: tau = -log(u_tau)/a0 and the reaction
/// picked by the cumulative rule at r_select.
[[nodiscard]] std::optional<SsaEvent> ssa_step(const ReactionNetwork& network,
                                               std::span<const double> x, double u_tau,
                                               double r_select);

/// Runs from the network's initial state to t_final.
[[nodiscard]] SsaTrace ssa_simulate(const ReactionNetwork& network, double t_final,
                                    RngStream& stream, bool record_log = false);

/// Runs from an explicit state (state.t is the start time).
[[nodiscard]] SsaTrace ssa_simulate(const ReactionNetwork& network, HybridState state,
                                    double t_final, RngStream& stream, bool record_log = false);

}  // namespace hybridsim
