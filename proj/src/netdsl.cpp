#include "hybridsim/netdsl.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace hybridsim {

namespace {

enum class Tok { ident, number, arrow, symbol, end };

struct Token {
    Tok kind = Tok::end;
    std::string text;
    double number = 0.0;
    int column = 1;
};

struct LineError {
    int column;
    std::string message;
};

std::vector<Token> lex_line(const std::string& line, std::vector<LineError>& errors) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < line.size()) {
        const char c = line[i];
        const int col = static_cast<int>(i) + 1;
        if (c == '#') {
            break;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < line.size() &&
                   (std::isalnum(static_cast<unsigned char>(line[j])) || line[j] == '_')) {
                ++j;
            }
            out.push_back({Tok::ident, line.substr(i, j - i), 0.0, col});
            i = j;
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && i + 1 < line.size() && std::isdigit(static_cast<unsigned char>(line[i + 1])))) {
            std::size_t j = i;
            while (j < line.size() && std::isdigit(static_cast<unsigned char>(line[j]))) {
                ++j;
            }
            if (j < line.size() && line[j] == '.') {
                ++j;
                while (j < line.size() && std::isdigit(static_cast<unsigned char>(line[j]))) {
                    ++j;
                }
            }
            if (j < line.size() && (line[j] == 'e' || line[j] == 'E')) {
                std::size_t k = j + 1;
                if (k < line.size() && (line[k] == '+' || line[k] == '-')) {
                    ++k;
                }
                if (k < line.size() && std::isdigit(static_cast<unsigned char>(line[k]))) {
                    while (k < line.size() && std::isdigit(static_cast<unsigned char>(line[k]))) {
                        ++k;
                    }
                    j = k;
                }
            }
            const std::string text = line.substr(i, j - i);
            out.push_back({Tok::number, text, std::strtod(text.c_str(), nullptr), col});
            i = j;
            continue;
        }
        if (c == '-' && i + 1 < line.size() && line[i + 1] == '>') {
            out.push_back({Tok::arrow, "->", 0.0, col});
            i += 2;
            continue;
        }
        if (std::string_view("=:@()+-*/^,").find(c) != std::string_view::npos) {
            out.push_back({Tok::symbol, std::string(1, c), 0.0, col});
            ++i;
            continue;
        }
        errors.push_back({col, std::string("unexpected character '") + c + "'"});
        ++i;
    }
    out.push_back({Tok::end, "", 0.0, static_cast<int>(line.size()) + 1});
    return out;
}

struct SyntaxError {
    int column;
    std::string message;
};

struct SymbolTable {
    std::map<std::string, std::size_t> species;
    std::map<std::string, std::size_t> parameters;
};

class LineParser {
public:
    LineParser(const std::vector<Token>& toks, const SymbolTable& symbols)
        : toks_(toks), symbols_(symbols) {}

    const Token& peek() const { return toks_[pos_]; }
    const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
    bool at_end() const { return peek().kind == Tok::end; }

    bool accept_symbol(char c) {
        if (peek().kind == Tok::symbol && peek().text[0] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect_symbol(char c) {
        if (!accept_symbol(c)) {
            fail(peek(), std::string("expected '") + c + "'");
        }
    }

    const Token& expect_ident(const char* what) {
        if (peek().kind != Tok::ident) {
            fail(peek(), std::string("expected ") + what);
        }
        return next();
    }

    const Token& expect_number(const char* what) {
        if (peek().kind != Tok::number) {
            fail(peek(), std::string("expected ") + what);
        }
        return next();
    }

    [[noreturn]] static void fail(const Token& at, std::string message) {
        throw SyntaxError{at.column, std::move(message)};
    }

    // side := '0' | term ('+' term)* | <empty>
    std::vector<StoichTerm> side(bool reactant_side) {
        std::vector<StoichTerm> terms;
        const auto side_done = [&] {
            return at_end() || peek().kind == Tok::arrow ||
                   (peek().kind == Tok::symbol && peek().text == "@");
        };
        if (side_done()) {
            return terms;
        }
        if (peek().kind == Tok::number && peek().number == 0.0 &&
            (toks_[pos_ + 1].kind == Tok::arrow ||
             (toks_[pos_ + 1].kind == Tok::symbol && toks_[pos_ + 1].text == "@") ||
             toks_[pos_ + 1].kind == Tok::end)) {
            next();
            return terms;
        }
        while (true) {
            int coefficient = 1;
            if (peek().kind == Tok::number) {
                const Token& num = next();
                if (num.number < 1 || num.number != std::floor(num.number) || num.number > 1e6) {
                    fail(num, "stoichiometric coefficient must be a positive integer");
                }
                coefficient = static_cast<int>(num.number);
            }
            const Token& name = expect_ident(reactant_side ? "reactant species" : "product species");
            const auto it = symbols_.species.find(name.text);
            if (it == symbols_.species.end()) {
                fail(name, "unknown species '" + name.text + "'");
            }
            bool merged = false;
            for (auto& t : terms) {
                if (t.species == it->second) {
                    t.coefficient += coefficient;
                    merged = true;
                }
            }
            if (!merged) {
                terms.push_back({it->second, coefficient});
            }
            if (side_done()) {
                break;
            }
            if (!accept_symbol('+')) {
                fail(peek(), "malformed stoichiometry: expected '+' or '->'");
            }
        }
        return terms;
    }

    // expression grammar, lowest to highest: + -, * /, unary -, ^ (right assoc)
    Expr expression() {
        Expr lhs = term();
        while (true) {
            if (accept_symbol('+')) {
                lhs = lhs + term();
            } else if (peek().kind == Tok::symbol && peek().text == "-") {
                next();
                lhs = lhs - term();
            } else {
                return lhs;
            }
        }
    }

    Expr term() {
        Expr lhs = unary();
        while (true) {
            if (accept_symbol('*')) {
                lhs = lhs * unary();
            } else if (accept_symbol('/')) {
                lhs = lhs / unary();
            } else {
                return lhs;
            }
        }
    }

    Expr unary() {
        if (accept_symbol('-')) {
            return -unary();
        }
        return power();
    }

    Expr power() {
        Expr base = primary();
        if (accept_symbol('^')) {
            return pow(std::move(base), unary());
        }
        return base;
    }

    Expr primary() {
        const Token& tok = peek();
        if (tok.kind == Tok::number) {
            next();
            return Expr::number(tok.number);
        }
        if (tok.kind == Tok::ident) {
            next();
            if (tok.text == "hill" && peek().kind == Tok::symbol && peek().text == "(") {
                next();
                Expr x = expression();
                expect_symbol(',');
                Expr k = expression();
                expect_symbol(',');
                Expr n = expression();
                expect_symbol(')');
                return Expr::hill(std::move(x), std::move(k), std::move(n));
            }
            if (auto it = symbols_.species.find(tok.text); it != symbols_.species.end()) {
                return Expr::species(it->second);
            }
            if (auto it = symbols_.parameters.find(tok.text); it != symbols_.parameters.end()) {
                return Expr::parameter(it->second);
            }
            fail(tok, "unknown identifier '" + tok.text + "'");
        }
        if (accept_symbol('(')) {
            Expr inner = expression();
            expect_symbol(')');
            return inner;
        }
        fail(tok, "expected an expression");
    }

private:
    const std::vector<Token>& toks_;
    const SymbolTable& symbols_;
    std::size_t pos_ = 0;
};

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string current;
    for (char c : text) {
        if (c == '\n') {
            if (!current.empty() && current.back() == '\r') {
                current.pop_back();
            }
            lines.push_back(current);
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    if (!current.empty()) {
        lines.push_back(current);
    }
    return lines;
}

std::string render_side(const std::vector<StoichTerm>& terms, const ReactionNetwork& net) {
    if (terms.empty()) {
        return "0";
    }
    std::string out;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        if (i > 0) {
            out += " + ";
        }
        if (terms[i].coefficient != 1) {
            out += std::to_string(terms[i].coefficient) + " ";
        }
        out += net.species().at(terms[i].species).name;
    }
    return out;
}

}  // namespace

std::string format_diagnostic(const ParseDiagnostic& d, const std::string& origin) {
    return origin + ":" + std::to_string(d.line) + ":" + std::to_string(d.column) + ": " +
           (d.severity == Severity::error ? "error: " : "warning: ") + d.message;
}

ModelError::ModelError(std::string origin, std::vector<ParseDiagnostic> diagnostics)
    : std::runtime_error([&] {
          std::string msg;
          for (const auto& d : diagnostics) {
              if (!msg.empty()) {
                  msg += "\n";
              }
              msg += format_diagnostic(d, origin);
          }
          return msg;
      }()),
      diagnostics_(std::move(diagnostics)) {}

ParseResult parse_model(const ModelSource& source) {
    const auto lines = split_lines(source.text);
    std::vector<ParseDiagnostic> errors;
    std::vector<ParseDiagnostic> warnings;
    const auto error_at = [&](int line, int col, std::string msg) {
        errors.push_back({line, col, std::move(msg), Severity::error});
    };

    std::vector<std::vector<Token>> tokens(lines.size());
    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::vector<LineError> lex_errors;
        tokens[i] = lex_line(lines[i], lex_errors);
        for (auto& e : lex_errors) {
            error_at(static_cast<int>(i) + 1, e.column, e.message);
        }
    }

    // Pass 1: declarations.
    std::vector<Species> species;
    std::vector<Parameter> parameters;
    std::vector<int> parameter_line;
    SymbolTable symbols;
    SymbolTable empty;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto& toks = tokens[i];
        const int line_no = static_cast<int>(i) + 1;
        if (toks.front().kind != Tok::ident ||
            (toks.front().text != "species" && toks.front().text != "param")) {
            continue;
        }
        try {
            LineParser p(toks, empty);
            const bool is_species = p.next().text == "species";
            const Token& name = p.expect_ident(is_species ? "species name" : "parameter name");
            p.expect_symbol('=');
            const bool negative = p.accept_symbol('-');
            const Token& num = p.expect_number("a number");
            const double value = negative ? -num.number : num.number;
            if (!p.at_end()) {
                LineParser::fail(p.peek(), "unexpected trailing input");
            }
            if (symbols.species.contains(name.text) || symbols.parameters.contains(name.text)) {
                error_at(line_no, name.column,
                         std::string("duplicate ") + (is_species ? "species" : "param") + " '" +
                             name.text + "'");
                continue;
            }
            if (is_species) {
                if (value < 0.0) {
                    error_at(line_no, num.column, "initial amount of '" + name.text + "' is negative");
                }
                symbols.species[name.text] = species.size();
                species.push_back({name.text, value});
            } else {
                symbols.parameters[name.text] = parameters.size();
                parameters.push_back({name.text, value});
                parameter_line.push_back(line_no);
            }
        } catch (const SyntaxError& e) {
            error_at(line_no, e.column, e.message);
        }
    }

    // Pass 2: reactions.
    std::vector<Reaction> reactions;
    std::set<std::string> reaction_names;
    std::vector<bool> parameter_used(parameters.size(), false);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto& toks = tokens[i];
        const int line_no = static_cast<int>(i) + 1;
        if (toks.front().kind == Tok::end) {
            continue;
        }
        if (toks.front().kind != Tok::ident) {
            error_at(line_no, toks.front().column, "expected 'species', 'param' or 'reaction'");
            continue;
        }
        const auto& keyword = toks.front().text;
        if (keyword == "species" || keyword == "param") {
            continue;
        }
        if (keyword != "reaction") {
            error_at(line_no, toks.front().column, "unknown statement '" + keyword + "'");
            continue;
        }
        try {
            LineParser p(toks, symbols);
            p.next();
            const Token& name = p.expect_ident("reaction name");
            p.expect_symbol(':');
            Reaction r;
            r.name = name.text;
            r.reactants = p.side(true);
            if (p.peek().kind != Tok::arrow) {
                LineParser::fail(p.peek(), "malformed stoichiometry: expected '->'");
            }
            p.next();
            r.products = p.side(false);
            p.expect_symbol('@');
            const Token& law = p.expect_ident("'mass_action' or 'expr'");
            if (law.text == "mass_action") {
                p.expect_symbol('(');
                const Token& k = p.expect_ident("rate constant parameter");
                const auto it = symbols.parameters.find(k.text);
                if (it == symbols.parameters.end()) {
                    LineParser::fail(k, "unknown parameter '" + k.text + "'");
                }
                parameter_used[it->second] = true;
                r.rate_law.kind = MassAction{it->second};
                p.expect_symbol(')');
            } else if (law.text == "expr") {
                p.expect_symbol('(');
                Expr e = p.expression();
                p.expect_symbol(')');
                std::vector<std::size_t> used;
                e.collect_parameters(used);
                for (auto u : used) {
                    parameter_used[u] = true;
                }
                r.rate_law.kind = CustomLaw{std::move(e)};
            } else {
                LineParser::fail(law, "unknown rate law '" + law.text + "'");
            }
            const Token& part = p.expect_ident("'partition='");
            if (part.text != "partition") {
                LineParser::fail(part, "expected 'partition='");
            }
            p.expect_symbol('=');
            const Token& label = p.expect_ident("'ode' or 'ssa'");
            if (label.text == "ode") {
                r.partition = Partition::fast;
            } else if (label.text == "ssa") {
                r.partition = Partition::slow;
            } else {
                LineParser::fail(label, "partition must be 'ode' or 'ssa'");
            }
            if (!p.at_end()) {
                if (p.peek().kind == Tok::ident && p.peek().text == "scale") {
                    p.next();
                    p.expect_symbol('=');
                }
                const Token& s = p.expect_number("scale factor");
                if (!(s.number > 0.0)) {
                    LineParser::fail(s, "scale factor must be positive");
                }
                r.rate_law.scale = s.number;
            }
            if (!p.at_end()) {
                LineParser::fail(p.peek(), "unexpected trailing input");
            }
            if (!reaction_names.insert(r.name).second) {
                LineParser::fail(name, "duplicate reaction '" + r.name + "'");
            }
            reactions.push_back(std::move(r));
        } catch (const SyntaxError& e) {
            error_at(line_no, e.column, e.message);
        }
    }

    for (std::size_t k = 0; k < parameters.size(); ++k) {
        if (!parameter_used[k]) {
            warnings.push_back({parameter_line[k], 1,
                                "parameter '" + parameters[k].name + "' is never used",
                                Severity::warning});
        }
    }

    if (reactions.empty() && errors.empty()) {
        error_at(1, 1, "no reactions");
    }
    if (!errors.empty()) {
        return ParseResult{std::move(errors), std::move(warnings)};
    }

    ReactionNetwork network(std::move(species), std::move(parameters), std::move(reactions));
    auto problems = validate_network(network);
    if (!problems.empty()) {
        return ParseResult{std::move(problems), std::move(warnings)};
    }
    return ParseResult{std::move(network), std::move(warnings)};
}

ReactionNetwork load_model(const ModelSource& source) {
    auto result = parse_model(source);
    if (!result.ok()) {
        throw ModelError(source.origin, result.errors());
    }
    return result.network();
}

ReactionNetwork load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open model file '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_model(ModelSource{ss.str(), path});
}

std::vector<ParseDiagnostic> validate_network(const ReactionNetwork& network) {
    std::vector<ParseDiagnostic> out;
    const auto report = [&](std::string msg) { out.push_back({1, 1, std::move(msg), Severity::error}); };

    const std::size_t n = network.species_count();
    const std::size_t np = network.parameters().size();
    std::set<std::string> names;
    for (const auto& s : network.species()) {
        if (s.name.empty()) {
            report("species with empty name");
        }
        if (!names.insert(s.name).second) {
            report("duplicate species '" + s.name + "'");
        }
        if (!(s.initial_amount >= 0.0) || !std::isfinite(s.initial_amount)) {
            report("species '" + s.name + "' has invalid initial amount " +
                   std::to_string(s.initial_amount));
        }
    }
    std::set<std::string> pnames;
    for (const auto& p : network.parameters()) {
        if (names.contains(p.name) || !pnames.insert(p.name).second) {
            report("duplicate identifier '" + p.name + "'");
        }
        if (!std::isfinite(p.value)) {
            report("parameter '" + p.name + "' is not finite");
        }
    }
    if (network.reactions().empty()) {
        report("no reactions");
    }
    std::set<std::string> rnames;
    for (const auto& r : network.reactions()) {
        if (!rnames.insert(r.name).second) {
            report("duplicate reaction '" + r.name + "'");
        }
        for (const auto* side : {&r.reactants, &r.products}) {
            for (const auto& t : *side) {
                if (t.species >= n) {
                    report("reaction '" + r.name + "' references missing species index " +
                           std::to_string(t.species));
                }
                if (t.coefficient < 1) {
                    report("reaction '" + r.name + "' has a non-positive coefficient");
                }
            }
        }
        if (r.partition != Partition::fast && r.partition != Partition::slow) {
            report("reaction '" + r.name + "' has an invalid partition label");
        }
        if (!(r.rate_law.scale > 0.0) || !std::isfinite(r.rate_law.scale)) {
            report("reaction '" + r.name + "' has a non-positive scale factor");
        }
        if (const auto* ma = std::get_if<MassAction>(&r.rate_law.kind)) {
            if (ma->parameter >= np) {
                report("reaction '" + r.name + "' references a missing rate constant");
            } else if (network.parameters()[ma->parameter].value < 0.0) {
                report("reaction '" + r.name + "' has a negative rate constant");
            }
        } else {
            const auto& e = std::get<CustomLaw>(r.rate_law.kind).expression;
            if (e.empty()) {
                report("reaction '" + r.name + "' has an empty rate expression");
            }
            std::vector<std::size_t> sp;
            std::vector<std::size_t> pp;
            e.collect_species(sp);
            e.collect_parameters(pp);
            for (auto s : sp) {
                if (s >= n) {
                    report("rate law of '" + r.name + "' references a missing species");
                }
            }
            for (auto p : pp) {
                if (p >= np) {
                    report("rate law of '" + r.name + "' references a missing parameter");
                }
            }
        }
    }
    return out;
}

void require_valid(const ReactionNetwork& network) {
    auto problems = validate_network(network);
    if (!problems.empty()) {
        throw ModelError("<network>", std::move(problems));
    }
}

std::string print_model(const ReactionNetwork& network) {
    std::ostringstream out;
    for (const auto& s : network.species()) {
        out << "species " << s.name << " = " << format_real(s.initial_amount) << "\n";
    }
    for (const auto& p : network.parameters()) {
        out << "param " << p.name << " = " << format_real(p.value) << "\n";
    }
    const auto sn = network.species_names();
    const auto pn = network.parameter_names();
    for (const auto& r : network.reactions()) {
        out << "reaction " << r.name << ": " << render_side(r.reactants, network) << " -> "
            << render_side(r.products, network) << " @ ";
        if (const auto* ma = std::get_if<MassAction>(&r.rate_law.kind)) {
            out << "mass_action(" << pn.at(ma->parameter) << ")";
        } else {
            out << "expr(" << std::get<CustomLaw>(r.rate_law.kind).expression.to_string(sn, pn)
                << ")";
        }
        out << " partition=" << (r.partition == Partition::fast ? "ode" : "ssa");
        if (r.rate_law.scale != 1.0) {
            out << " scale=" << format_real(r.rate_law.scale);
        }
        out << "\n";
    }
    return out.str();
}

}  // namespace hybridsim
