#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "hybridsim/expr.hpp"

namespace hybridsim {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A rate law evaluated to a non-finite value.
class EvaluationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A discrete update drove a species below the clamp tolerance.
class NegativePopulationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Partition : std::uint8_t { fast, slow };

struct Species {
    std::string name;
    double initial_amount = 0.0;
};

struct Parameter {
    std::string name;
    double value = 0.0;
};

struct StoichTerm {
    std::size_t species = 0;
    int coefficient = 1;

    friend bool operator==(const StoichTerm&, const StoichTerm&) = default;
};

/// k * prod_s C(x_s, n_s) over the reactants (combinatorial form).
struct MassAction {
    std::size_t parameter = 0;

    friend bool operator==(const MassAction&, const MassAction&) = default;
};

/// Propensity given directly by an expression.
struct CustomLaw {
    Expr expression;

    friend bool operator==(const CustomLaw&, const CustomLaw&) = default;
};

struct RateLaw {
    std::variant<MassAction, CustomLaw> kind;
    double scale = 1.0;

    friend bool operator==(const RateLaw&, const RateLaw&) = default;
};

struct Reaction {
    std::string name;
    std::vector<StoichTerm> reactants;
    std::vector<StoichTerm> products;
    RateLaw rate_law;
    Partition partition = Partition::fast;
};

/// Time, species amounts, and the auxiliary firing variable z.
struct HybridState {
    double t = 0.0;
    Vector x;
    double z = 0.0;
};

/// Species, parameters and reactions of a model. Immutable once built;
/// the constructor only derives lookup tables and never rejects input
/// (see validate_network).
class ReactionNetwork {
public:
    ReactionNetwork() = default;
    ReactionNetwork(std::vector<Species> species, std::vector<Parameter> parameters,
                    std::vector<Reaction> reactions);

    [[nodiscard]] const std::vector<Species>& species() const noexcept { return species_; }
    [[nodiscard]] const std::vector<Parameter>& parameters() const noexcept { return parameters_; }
    [[nodiscard]] const std::vector<Reaction>& reactions() const noexcept { return reactions_; }
    [[nodiscard]] std::size_t species_count() const noexcept { return species_.size(); }
    [[nodiscard]] std::size_t reaction_count() const noexcept { return reactions_.size(); }

    /// Reaction indices of each partition, in network order.
    [[nodiscard]] const std::vector<std::size_t>& fast_reactions() const noexcept { return fast_; }
    [[nodiscard]] const std::vector<std::size_t>& slow_reactions() const noexcept { return slow_; }

    /// Dense state-change vector v_j (one entry per species).
    [[nodiscard]] const std::vector<int>& state_change(std::size_t reaction) const {
        return state_change_.at(reaction);
    }

    [[nodiscard]] std::vector<std::string> species_names() const;
    [[nodiscard]] std::vector<std::string> parameter_names() const;
    [[nodiscard]] std::vector<std::string> slow_reaction_names() const;

    /// npos when absent.
    [[nodiscard]] std::size_t find_species(std::string_view name) const noexcept;
    [[nodiscard]] std::size_t find_parameter(std::string_view name) const noexcept;
    [[nodiscard]] std::size_t find_reaction(std::string_view name) const noexcept;

    [[nodiscard]] Vector initial_amounts() const;
    [[nodiscard]] HybridState initial_state() const;

    /// 1e-8 * max(1, max_i |x_i(0)|).
    [[nodiscard]] double clamp_tolerance() const noexcept { return clamp_tolerance_; }

    /// Rate of one reaction at x (species clamped at zero, result clamped
    /// at zero). Throws EvaluationError on a non-finite value.
    [[nodiscard]] double rate(std::size_t reaction, std::span<const double> x) const;

    [[nodiscard]] ReactionNetwork with_parameter(std::string_view name, double value) const;
    [[nodiscard]] ReactionNetwork with_initial_amount(std::string_view name, double value) const;

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    struct SparseChange {
        std::size_t species;
        double delta;
    };

    void derive();

    std::vector<Species> species_;
    std::vector<Parameter> parameters_;
    std::vector<Reaction> reactions_;
    std::vector<double> parameter_values_;
    std::vector<std::vector<int>> state_change_;
    std::vector<std::vector<SparseChange>> sparse_change_;
    std::vector<std::size_t> fast_;
    std::vector<std::size_t> slow_;
    double clamp_tolerance_ = 1e-8;

    friend void fast_rhs(const ReactionNetwork&, std::span<const double>, std::span<double>);
};

/// Slow-partition propensities and their sum.
struct Propensities {
    std::vector<double> values;
    double total = 0.0;
};

[[nodiscard]] Propensities evaluate_propensities(const ReactionNetwork& network,
                                                 std::span<const double> x);
[[nodiscard]] inline Propensities evaluate_propensities(const ReactionNetwork& network,
                                                        const HybridState& state) {
    return evaluate_propensities(network, std::span<const double>(state.x.data(), state.x.size()));
}

/// Smallest index j with sum_{i<=j} a_i > r * total. Falls back to the last
/// positive entry if round-off keeps the partial sums below the threshold.
[[nodiscard]] std::size_t select_reaction(std::span<const double> propensities, double total,
                                          double r);

/// x <- x + v_reaction. Throws NegativePopulationError if any amount ends
/// below -clamp_tolerance.
void apply_state_change(const ReactionNetwork& network, HybridState& state, std::size_t reaction);

/// Right-hand side of the augmented system y = (x, z): fast-reaction flux
/// for every species (zero for species only touched by slow reactions) and
/// dz/dt = total slow propensity in the last slot.
void fast_rhs(const ReactionNetwork& network, std::span<const double> y, std::span<double> dydt);
[[nodiscard]] Vector fast_rhs(const ReactionNetwork& network, const HybridState& state);

using RhsFunction = std::function<void(double t, const Vector& y, Vector& dydt)>;

/// Forward-difference Jacobian with per-column increment
/// max(h_fd, h_fd * |y_j|). f0 must equal rhs(t, y).
[[nodiscard]] Matrix fd_jacobian(const RhsFunction& rhs, double t, const Vector& y,
                                 const Vector& f0, double h_fd);
[[nodiscard]] Matrix fd_jacobian(const RhsFunction& rhs, double t, const Vector& y, double h_fd);

}  // namespace hybridsim
