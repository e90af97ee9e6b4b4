#pragma once

#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "hybridsim/network.hpp"

namespace hybridsim {

// Model file format (.rxn), one statement per line, '#' starts a comment:
//
//   species <name> = <number>
//   param <name> = <number>
//   reaction <name>: <reactants> -> <products> @ <law> partition=<ode|ssa> [scale=<number>]
//
// A side is `0` (or empty) or a '+'-separated list of `[coefficient] name`.
// <law> is `mass_action(<param>)` or `expr(<expression>)`; expressions use
// + - * / ^, parentheses, numbers, species, parameters and hill(x, K, n).
// Declarations may appear in any order.

struct ModelSource {
    std::string text;
    std::string origin = "<inline>";
};

enum class Severity { error, warning };

struct ParseDiagnostic {
    int line = 1;
    int column = 1;
    std::string message;
    Severity severity = Severity::error;
};

[[nodiscard]] std::string format_diagnostic(const ParseDiagnostic& d, const std::string& origin);

/// Thrown by the throwing helpers; carries every diagnostic.
class ModelError : public std::runtime_error {
public:
    ModelError(std::string origin, std::vector<ParseDiagnostic> diagnostics);
    [[nodiscard]] const std::vector<ParseDiagnostic>& diagnostics() const noexcept {
        return diagnostics_;
    }

private:
    std::vector<ParseDiagnostic> diagnostics_;
};

/// A validated network, or the error diagnostics (never empty on failure).
/// Warnings alone do not fail a parse.
struct ParseResult {
    std::variant<ReactionNetwork, std::vector<ParseDiagnostic>> value;
    std::vector<ParseDiagnostic> warnings;

    [[nodiscard]] bool ok() const noexcept { return value.index() == 0; }
    [[nodiscard]] const ReactionNetwork& network() const { return std::get<0>(value); }
    [[nodiscard]] const std::vector<ParseDiagnostic>& errors() const { return std::get<1>(value); }
};

[[nodiscard]] ParseResult parse_model(const ModelSource& source);

/// Parses or throws ModelError.
[[nodiscard]] ReactionNetwork load_model(const ModelSource& source);
[[nodiscard]] ReactionNetwork load_model_file(const std::string& path);

/// Checks the structural invariants of a network. Returns an empty list when
/// the network is valid; positions are line 1, column 1 since a built network
/// carries no source.
[[nodiscard]] std::vector<ParseDiagnostic> validate_network(const ReactionNetwork& network);

/// Throws ModelError when validate_network reports anything.
void require_valid(const ReactionNetwork& network);

/// Renders a network in the model file format.
[[nodiscard]] std::string print_model(const ReactionNetwork& network);

}  // namespace hybridsim
