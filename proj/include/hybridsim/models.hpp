#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "hybridsim/network.hpp"

namespace hybridsim {

/// Built-in model id, slow-rate scale factor c, and parameter or
/// initial-amount overrides by name.
struct ModelConfig {
    std::string model = "toy";
    double scale_factor = 1.0;
    std::map<std::string, double> overrides;
};

/// S1 <-> S2 (fast, k1 = 0.5, km1 = 1.5), S2 -> S3 (slow, k2 = 1e-2), from
/// (7500, 2500, 0). The scale factor is ignored.
[[nodiscard]] ReactionNetwork build_toy(const ModelConfig& config = {});

/// Gene regulation model: 8 species, 13 mass-action reactions; mRNA
/// synthesis and degradation are slow and scaled by c.
[[nodiscard]] ReactionNetwork build_gene(const ModelConfig& config = {});

/// Three-variable cell cycle model with cell volume V and total Y_T as
/// continuous species and three mRNA counts driven by six slow reactions
/// scaled by c. Starts from V = 1, X = Y = YT = Z = 0, Mx = My = Mz = 1.
[[nodiscard]] ReactionNetwork build_cellcycle(const ModelConfig& config = {});

/// Dispatches on config.model. Throws std::invalid_argument for unknown ids,
/// non-positive c, or overrides naming neither a parameter nor a species.
[[nodiscard]] ReactionNetwork build_model(const ModelConfig& config);

[[nodiscard]] const std::vector<std::string>& builtin_model_ids();

/// Applies overrides (parameters first, then species initial amounts).
[[nodiscard]] ReactionNetwork apply_overrides(ReactionNetwork network,
                                              const std::map<std::string, double>& overrides);

}  // namespace hybridsim
