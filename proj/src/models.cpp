#include "hybridsim/models.hpp"

#include <stdexcept>

#include "hybridsim/netdsl.hpp"

namespace hybridsim {

namespace {

void check_scale(const ModelConfig& config) {
    if (!(config.scale_factor > 0.0)) {
        throw std::invalid_argument("scale factor must be positive");
    }
}

ReactionNetwork from_text(const std::string& text, const std::string& origin,
                          const ModelConfig& config) {
    return apply_overrides(load_model(ModelSource{text, origin}), config.overrides);
}

}  // namespace

ReactionNetwork apply_overrides(ReactionNetwork network,
                                const std::map<std::string, double>& overrides) {
    for (const auto& [name, value] : overrides) {
        if (network.find_parameter(name) != ReactionNetwork::npos) {
            network = network.with_parameter(name, value);
        } else if (network.find_species(name) != ReactionNetwork::npos) {
            network = network.with_initial_amount(name, value);
        } else {
            throw std::invalid_argument("override '" + name +
                                        "' names neither a parameter nor a species");
        }
    }
    return network;
}

ReactionNetwork build_toy(const ModelConfig& config) {
    const std::string text = R"(species S1 = 7500
species S2 = 2500
species S3 = 0
param k1 = 0.5
param km1 = 1.5
param k2 = 0.01
reaction R1: S1 -> S2 @ mass_action(k1) partition=ode
reaction R2: S2 -> S1 @ mass_action(km1) partition=ode
reaction R3: S2 -> S3 @ mass_action(k2) partition=ssa
)";
    return from_text(text, "<toy>", config);
}

ReactionNetwork build_gene(const ModelConfig& config) {
    check_scale(config);
    const std::string c = format_real(config.scale_factor);
    const std::string text = R"(species g = 1
species gi = 0
species m = 10
species p = 1000
species p2 = 100
species E = 100
species Ep = 0
species Ep2 = 0
param k1 = 0.5
param k2 = 60
param k3 = 0.05
param k4 = 0.05
param k5 = 0.001
param k6 = 40
param k7 = 40
param k8 = 1000
param k9 = 0.4
param k10 = 0.5
param k11 = 0.2
param k12 = 10
param k13 = 10
reaction R1: g -> g + m @ mass_action(k1) partition=ssa scale=)" + c + R"(
reaction R2: m -> m + p @ mass_action(k2) partition=ode
reaction R3: p -> 0 @ mass_action(k3) partition=ode
reaction R4: m -> 0 @ mass_action(k4) partition=ssa scale=)" + c + R"(
reaction R5: 2 p -> p2 @ mass_action(k5) partition=ode
reaction R6: p2 -> 2 p @ mass_action(k6) partition=ode
reaction R7: p2 + g -> gi @ mass_action(k7) partition=ode
reaction R8: gi -> p2 + g @ mass_action(k8) partition=ode
reaction R9: E + p2 -> Ep2 @ mass_action(k9) partition=ode
reaction R10: Ep2 -> E + p2 @ mass_action(k10) partition=ode
reaction R11: E + p -> Ep @ mass_action(k11) partition=ode
reaction R12: Ep -> E + p @ mass_action(k12) partition=ode
reaction R13: Ep -> E @ mass_action(k13) partition=ode
)";
    return from_text(text, "<gene>", config);
}

ReactionNetwork build_cellcycle(const ModelConfig& config) {
    check_scale(config);
    const std::string c = format_real(config.scale_factor);
    const std::string text = R"(species V = 1
species X = 0
species YT = 0
species Y = 0
species Z = 0
species Mx = 1
species My = 1
species Mz = 1
param mu = 0.006
param kdx = 0.04
param kdy = 0.02
param khyz = 7.5
param kpyx = 1.88
param kdz = 0.1
param kdmx = 3.5
param ksmy = 7
param kdmy = 3.5
param ksmz = 0.001
param ksmzx = 10
param kdmz = 0.15
param ksx = 1.53
param ksy = 1.35
param khy = 29.7
param ksz = 1.35
param ksmx = 1.04
param kdxy = 0.00741
param Jhy = 5.4
param Jpyx = 5.4
param Jsmzx = 756
reaction growth: 0 -> V @ expr(mu * V) partition=ode
reaction X_synthesis: 0 -> X @ expr(ksx * Mx * V) partition=ode
reaction X_degradation: X -> 0 @ mass_action(kdx) partition=ode
reaction X_degradation_Y: X -> 0 @ expr(kdxy * X * Y / V) partition=ode
reaction YT_synthesis: 0 -> YT @ expr(ksy * My * V) partition=ode
reaction YT_degradation: YT -> 0 @ mass_action(kdy) partition=ode
reaction Y_synthesis: 0 -> Y @ expr(ksy * My * V) partition=ode
reaction Y_degradation: Y -> 0 @ mass_action(kdy) partition=ode
reaction Y_activation: 0 -> Y @ expr((khy * V + khyz * Z) * (YT - Y) / (Jhy * V + YT - Y)) partition=ode
reaction Y_inactivation: Y -> 0 @ expr(kpyx * X * Y / (Jpyx * V + Y)) partition=ode
reaction Z_synthesis: 0 -> Z @ expr(ksz * Mz * V) partition=ode
reaction Z_degradation: Z -> 0 @ mass_action(kdz) partition=ode
reaction Mx_synthesis: 0 -> Mx @ expr(ksmx * V) partition=ssa scale=)" + c + R"(
reaction Mx_degradation: Mx -> 0 @ mass_action(kdmx) partition=ssa scale=)" + c + R"(
reaction My_synthesis: 0 -> My @ mass_action(ksmy) partition=ssa scale=)" + c + R"(
reaction My_degradation: My -> 0 @ mass_action(kdmy) partition=ssa scale=)" + c + R"(
reaction Mz_synthesis: 0 -> Mz @ expr(ksmz + ksmzx * hill(X, Jsmzx * V, 2)) partition=ssa scale=)" + c + R"(
reaction Mz_degradation: Mz -> 0 @ mass_action(kdmz) partition=ssa scale=)" + c + R"(
)";
    return from_text(text, "<cellcycle>", config);
}

const std::vector<std::string>& builtin_model_ids() {
    static const std::vector<std::string> ids = {"toy", "gene", "cellcycle"};
    return ids;
}

ReactionNetwork build_model(const ModelConfig& config) {
    if (config.model == "toy") {
        return build_toy(config);
    }
    if (config.model == "gene") {
        return build_gene(config);
    }
    if (config.model == "cellcycle") {
        return build_cellcycle(config);
    }
    throw std::invalid_argument("unknown model '" + config.model + "' (expected toy, gene or cellcycle)");
}

}  // namespace hybridsim
