#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "hybridsim/events.hpp"
#include "hybridsim/network.hpp"
#include "hybridsim/ode.hpp"
#include "hybridsim/rng.hpp"

namespace hybridsim {

enum class SolverKind { irk, bdf };

[[nodiscard]] std::string_view to_string(SolverKind kind) noexcept;
/// "irk" or "bdf"; throws std::invalid_argument otherwise.
[[nodiscard]] SolverKind parse_solver_kind(std::string_view name);

struct HybridOptions {
    SolverKind solver = SolverKind::irk;
    IntegratorOptions integrator;
    bool record_events = false;
    /// Times (increasing) at which the pre-firing state is recorded.
    std::vector<double> sample_times;
};

struct FiringRecord {
    EventRecord event;
    std::size_t reaction = 0;  // index into the slow reactions
    double overshoot = 0.0;  // z at the end of the step that crossed
};

/// Overshoot bins: [0, 1e-6), [1e-6, 1e-4), [1e-4, 1e-2), [1e-2, 1), [1, inf).
inline constexpr std::size_t kOvershootBins = 5;
[[nodiscard]] std::size_t overshoot_bin(double z_end) noexcept;

struct HybridRunResult {
    HybridState final_state;
    std::vector<std::uint64_t> firing_counts;  // per slow reaction
    std::vector<FiringRecord> event_log;  // filled when record_events
    SolverCounters counters;
    std::array<std::uint64_t, 3> localization_counts{};  // by LocalizationMethod
    std::array<std::uint64_t, kOvershootBins> overshoot_histogram{};
    std::uint64_t empty_crossings = 0;  // crossings with zero total propensity
    std::vector<double> sample_t;
    std::vector<Vector> samples;

    [[nodiscard]] std::uint64_t total_firings() const noexcept;
};

struct CycleOutcome {
    enum class Kind { event, reached_t_final } kind = Kind::reached_t_final;
    std::size_t reaction = 0;  // slow-reaction index when kind == event
    bool fired = false;  // false if the total propensity vanished at the crossing
};

/// Runs the hybrid loop on one network: the fast reactions and the
/// auxiliary variable z = log(r1) + int a_tot dt are integrated together;
/// a slow reaction fires when z crosses zero.
class HybridSimulator {
public:
    HybridSimulator(const ReactionNetwork& network, HybridOptions options);
    ~HybridSimulator();
    HybridSimulator(const HybridSimulator&) = delete;
    HybridSimulator& operator=(const HybridSimulator&) = delete;

    /// Sets the state (z is ignored) and clears all tallies.
    void reset(const HybridState& state);

    /// One cycle with the given uniforms: z <- log(r1), integrate until z
    /// reaches 0 or t_final, then pick the slow reaction with r2 and fire it.
    CycleOutcome cycle(double t_final, double r1, double r2);

    [[nodiscard]] const HybridState& state() const noexcept { return state_; }
    [[nodiscard]] const Integrator& integrator() const noexcept { return *solver_; }
    /// Tallies so far (the final state is the current state).
    [[nodiscard]] HybridRunResult result() const;

private:
    void record_samples(double t_upto);  // from the solver's last step
    void record_current(double t_upto);  // the current state

    const ReactionNetwork* network_;
    HybridOptions options_;
    std::unique_ptr<Integrator> solver_;
    std::size_t n_ = 0;
    HybridState state_;
    bool started_ = false;
    HybridRunResult tally_;
    std::size_t next_sample_ = 0;
};

/// Cycles until t_final, drawing r1 then r2 from the stream for every cycle.
[[nodiscard]] HybridRunResult hybrid_simulate(const ReactionNetwork& network, double t_final,
                                              const HybridOptions& options, RngStream& stream);

/// Builds the augmented ODE system (x, z) of a network.
[[nodiscard]] OdeSystem augmented_system(const ReactionNetwork& network);

/// Creates the integrator for a solver kind.
[[nodiscard]] std::unique_ptr<Integrator> make_integrator(SolverKind kind, OdeSystem system,
                                                          const IntegratorOptions& options);

}  // namespace hybridsim
