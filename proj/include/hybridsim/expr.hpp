#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hybridsim {

/// Shortest decimal form that parses back to the same double.
[[nodiscard]] std::string format_real(double v);

/// Arithmetic expression over species amounts and parameters, used for
/// custom rate laws. Nodes live in a flat vector so the tree copies by value.
class Expr {
public:
    enum class Op : std::uint8_t {
        number,
        species,
        parameter,
        add,
        sub,
        mul,
        div,
        pow,
        neg,
        hill,  // hill(x, K, n) = x^n / (K^n + x^n)
    };

    struct Node {
        Op op = Op::number;
        double value = 0.0;
        std::size_t index = 0;  // species or parameter index
        int args[3] = {-1, -1, -1};
    };

    Expr() = default;

    static Expr number(double v);
    static Expr species(std::size_t index);
    static Expr parameter(std::size_t index);
    static Expr hill(Expr x, Expr k, Expr n);

    friend Expr operator+(Expr a, Expr b);
    friend Expr operator-(Expr a, Expr b);
    friend Expr operator*(Expr a, Expr b);
    friend Expr operator/(Expr a, Expr b);
    friend Expr operator-(Expr a);
    friend Expr pow(Expr base, Expr exponent);

    [[nodiscard]] bool empty() const noexcept { return nodes_.empty(); }

    /// Species values are read clamped at zero.
    [[nodiscard]] double evaluate(std::span<const double> species,
                                  std::span<const double> parameters) const;

    /// Renders with the given names; the output parses back with the
    /// model-file expression grammar.
    [[nodiscard]] std::string to_string(const std::vector<std::string>& species_names,
                                        const std::vector<std::string>& parameter_names) const;

    void collect_species(std::vector<std::size_t>& out) const;
    void collect_parameters(std::vector<std::size_t>& out) const;

    [[nodiscard]] const std::vector<Node>& nodes() const noexcept { return nodes_; }

    friend bool operator==(const Expr&, const Expr&) = default;

private:
    static Expr combine(Op op, Expr a, Expr b);
    int append(const Expr& other);  // returns root index of the appended copy
    double eval(int node, std::span<const double> species,
                std::span<const double> parameters) const;
    std::string render(int node, int parent_prec, bool right_child,
                       const std::vector<std::string>& species_names,
                       const std::vector<std::string>& parameter_names) const;

    std::vector<Node> nodes_;  // root is the last node
};

}  // namespace hybridsim
