#include "hybridsim/network.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hybridsim {

namespace {

double falling_binomial(double x, int n) {
    double value = 1.0;
    for (int i = 0; i < n; ++i) {
        value *= (x - i) / (i + 1);
    }
    return value;
}

}  // namespace

ReactionNetwork::ReactionNetwork(std::vector<Species> species, std::vector<Parameter> parameters,
                                 std::vector<Reaction> reactions)
    : species_(std::move(species)),
      parameters_(std::move(parameters)),
      reactions_(std::move(reactions)) {
    derive();
}

void ReactionNetwork::derive() {
    const std::size_t n = species_.size();
    parameter_values_.clear();
    for (const auto& p : parameters_) {
        parameter_values_.push_back(p.value);
    }

    state_change_.assign(reactions_.size(), std::vector<int>(n, 0));
    sparse_change_.assign(reactions_.size(), {});
    fast_.clear();
    slow_.clear();
    for (std::size_t j = 0; j < reactions_.size(); ++j) {
        const auto& r = reactions_[j];
        auto& v = state_change_[j];
        // out-of-range indices are reported by validate_network
        for (const auto& term : r.reactants) {
            if (term.species < n) {
                v[term.species] -= term.coefficient;
            }
        }
        for (const auto& term : r.products) {
            if (term.species < n) {
                v[term.species] += term.coefficient;
            }
        }
        for (std::size_t s = 0; s < n; ++s) {
            if (v[s] != 0) {
                sparse_change_[j].push_back({s, static_cast<double>(v[s])});
            }
        }
        (r.partition == Partition::fast ? fast_ : slow_).push_back(j);
    }

    double largest = 1.0;
    for (const auto& s : species_) {
        largest = std::max(largest, std::abs(s.initial_amount));
    }
    clamp_tolerance_ = 1e-8 * largest;
}

std::vector<std::string> ReactionNetwork::species_names() const {
    std::vector<std::string> out;
    for (const auto& s : species_) {
        out.push_back(s.name);
    }
    return out;
}

std::vector<std::string> ReactionNetwork::parameter_names() const {
    std::vector<std::string> out;
    for (const auto& p : parameters_) {
        out.push_back(p.name);
    }
    return out;
}

std::vector<std::string> ReactionNetwork::slow_reaction_names() const {
    std::vector<std::string> out;
    for (auto j : slow_) {
        out.push_back(reactions_[j].name);
    }
    return out;
}

std::size_t ReactionNetwork::find_species(std::string_view name) const noexcept {
    for (std::size_t i = 0; i < species_.size(); ++i) {
        if (species_[i].name == name) {
            return i;
        }
    }
    return npos;
}

std::size_t ReactionNetwork::find_parameter(std::string_view name) const noexcept {
    for (std::size_t i = 0; i < parameters_.size(); ++i) {
        if (parameters_[i].name == name) {
            return i;
        }
    }
    return npos;
}

std::size_t ReactionNetwork::find_reaction(std::string_view name) const noexcept {
    for (std::size_t i = 0; i < reactions_.size(); ++i) {
        if (reactions_[i].name == name) {
            return i;
        }
    }
    return npos;
}

Vector ReactionNetwork::initial_amounts() const {
    Vector x(static_cast<Eigen::Index>(species_.size()));
    for (std::size_t i = 0; i < species_.size(); ++i) {
        x[static_cast<Eigen::Index>(i)] = species_[i].initial_amount;
    }
    return x;
}

HybridState ReactionNetwork::initial_state() const {
    return HybridState{0.0, initial_amounts(), 0.0};
}

double ReactionNetwork::rate(std::size_t reaction, std::span<const double> x) const {
    const Reaction& r = reactions_[reaction];
    double value = 0.0;
    if (const auto* ma = std::get_if<MassAction>(&r.rate_law.kind)) {
        value = parameter_values_[ma->parameter];
        for (const auto& term : r.reactants) {
            const double amount = std::max(x[term.species], 0.0);
            value *= term.coefficient == 1 ? amount : falling_binomial(amount, term.coefficient);
        }
    } else {
        value = std::get<CustomLaw>(r.rate_law.kind).expression.evaluate(x, parameter_values_);
    }
    value *= r.rate_law.scale;
    if (!std::isfinite(value)) {
        throw EvaluationError("rate law of reaction '" + r.name + "' evaluated to a non-finite value");
    }
    return value > 0.0 ? value : 0.0;
}

ReactionNetwork ReactionNetwork::with_parameter(std::string_view name, double value) const {
    const auto idx = find_parameter(name);
    if (idx == npos) {
        throw std::invalid_argument("unknown parameter '" + std::string(name) + "'");
    }
    ReactionNetwork copy = *this;
    copy.parameters_[idx].value = value;
    copy.derive();
    return copy;
}

ReactionNetwork ReactionNetwork::with_initial_amount(std::string_view name, double value) const {
    const auto idx = find_species(name);
    if (idx == npos) {
        throw std::invalid_argument("unknown species '" + std::string(name) + "'");
    }
    ReactionNetwork copy = *this;
    copy.species_[idx].initial_amount = value;
    copy.derive();
    return copy;
}

Propensities evaluate_propensities(const ReactionNetwork& network, std::span<const double> x) {
    Propensities out;
    out.values.reserve(network.slow_reactions().size());
    for (auto j : network.slow_reactions()) {
        const double a = network.rate(j, x);
        out.values.push_back(a);
        out.total += a;
    }
    return out;
}

std::size_t select_reaction(std::span<const double> propensities, double total, double r) {
    const double threshold = r * total;
    double partial = 0.0;
    std::size_t last_positive = propensities.empty() ? 0 : propensities.size() - 1;
    for (std::size_t i = 0; i < propensities.size(); ++i) {
        partial += propensities[i];
        if (propensities[i] > 0.0) {
            last_positive = i;
        }
        if (partial > threshold) {
            return i;
        }
    }
    return last_positive;
}

void apply_state_change(const ReactionNetwork& network, HybridState& state, std::size_t reaction) {
    const auto& v = network.state_change(reaction);
    for (std::size_t s = 0; s < v.size(); ++s) {
        if (v[s] == 0) {
            continue;
        }
        auto& amount = state.x[static_cast<Eigen::Index>(s)];
        amount += v[s];
        if (amount < -network.clamp_tolerance()) {
            throw NegativePopulationError("reaction '" + network.reactions()[reaction].name +
                                          "' drove species '" + network.species()[s].name +
                                          "' to " + std::to_string(amount));
        }
    }
}

void fast_rhs(const ReactionNetwork& network, std::span<const double> y, std::span<double> dydt) {
    const std::size_t n = network.species_count();
    std::fill(dydt.begin(), dydt.end(), 0.0);
    const auto x = y.first(n);
    for (auto j : network.fast_) {
        const double a = network.rate(j, x);
        for (const auto& c : network.sparse_change_[j]) {
            dydt[c.species] += c.delta * a;
        }
    }
    double total = 0.0;
    for (auto j : network.slow_) {
        total += network.rate(j, x);
    }
    dydt[n] = total;
    for (std::size_t i = 0; i <= n; ++i) {
        if (!std::isfinite(dydt[i])) {
            throw EvaluationError("fast right-hand side is non-finite");
        }
    }
}

Vector fast_rhs(const ReactionNetwork& network, const HybridState& state) {
    const auto n = static_cast<Eigen::Index>(network.species_count());
    Vector y(n + 1);
    y.head(n) = state.x;
    y[n] = state.z;
    Vector dy(n + 1);
    fast_rhs(network, std::span<const double>(y.data(), static_cast<std::size_t>(y.size())),
             std::span<double>(dy.data(), static_cast<std::size_t>(dy.size())));
    return dy;
}

Matrix fd_jacobian(const RhsFunction& rhs, double t, const Vector& y, const Vector& f0,
                   double h_fd) {
    if (!(h_fd > 0.0)) {
        throw std::invalid_argument("fd_jacobian: increment must be positive");
    }
    const auto n = y.size();
    Matrix jac(f0.size(), n);
    Vector yp = y;
    Vector fp(f0.size());
    for (Eigen::Index j = 0; j < n; ++j) {
        const double delta = std::max(h_fd, h_fd * std::abs(y[j]));
        yp[j] = y[j] + delta;
        // use the representable increment
        const double actual = yp[j] - y[j];
        rhs(t, yp, fp);
        jac.col(j) = (fp - f0) / actual;
        yp[j] = y[j];
    }
    if (!jac.allFinite()) {
        throw EvaluationError("finite-difference Jacobian has non-finite entries");
    }
    return jac;
}

Matrix fd_jacobian(const RhsFunction& rhs, double t, const Vector& y, double h_fd) {
    Vector f0(y.size());
    rhs(t, y, f0);
    return fd_jacobian(rhs, t, y, f0, h_fd);
}

}  // namespace hybridsim
