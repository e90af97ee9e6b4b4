#include "hybridsim/expr.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace hybridsim {

namespace {

int precedence(Expr::Op op) {
    switch (op) {
    case Expr::Op::add:
    case Expr::Op::sub:
        return 1;
    case Expr::Op::mul:
    case Expr::Op::div:
        return 2;
    case Expr::Op::neg:
        return 3;
    case Expr::Op::pow:
        return 4;
    default:
        return 5;
    }
}

}  // namespace

std::string format_real(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

Expr Expr::number(double v) {
    Expr e;
    e.nodes_.push_back(Node{Op::number, v, 0, {-1, -1, -1}});
    return e;
}

Expr Expr::species(std::size_t index) {
    Expr e;
    e.nodes_.push_back(Node{Op::species, 0.0, index, {-1, -1, -1}});
    return e;
}

Expr Expr::parameter(std::size_t index) {
    Expr e;
    e.nodes_.push_back(Node{Op::parameter, 0.0, index, {-1, -1, -1}});
    return e;
}

int Expr::append(const Expr& other) {
    const int offset = static_cast<int>(nodes_.size());
    for (Node n : other.nodes_) {
        for (int& a : n.args) {
            if (a >= 0) {
                a += offset;
            }
        }
        nodes_.push_back(n);
    }
    return static_cast<int>(nodes_.size()) - 1;
}

Expr Expr::combine(Op op, Expr a, Expr b) {
    Expr e;
    const int lhs = e.append(a);
    const int rhs = e.append(b);
    e.nodes_.push_back(Node{op, 0.0, 0, {lhs, rhs, -1}});
    return e;
}

Expr operator+(Expr a, Expr b) { return Expr::combine(Expr::Op::add, std::move(a), std::move(b)); }
Expr operator-(Expr a, Expr b) { return Expr::combine(Expr::Op::sub, std::move(a), std::move(b)); }
Expr operator*(Expr a, Expr b) { return Expr::combine(Expr::Op::mul, std::move(a), std::move(b)); }
Expr operator/(Expr a, Expr b) { return Expr::combine(Expr::Op::div, std::move(a), std::move(b)); }
Expr pow(Expr base, Expr exponent) {
    return Expr::combine(Expr::Op::pow, std::move(base), std::move(exponent));
}

Expr operator-(Expr a) {
    Expr e;
    const int arg = e.append(a);
    e.nodes_.push_back(Expr::Node{Expr::Op::neg, 0.0, 0, {arg, -1, -1}});
    return e;
}

Expr Expr::hill(Expr x, Expr k, Expr n) {
    Expr e;
    const int a0 = e.append(x);
    const int a1 = e.append(k);
    const int a2 = e.append(n);
    e.nodes_.push_back(Node{Op::hill, 0.0, 0, {a0, a1, a2}});
    return e;
}

double Expr::evaluate(std::span<const double> species,
                      std::span<const double> parameters) const {
    if (nodes_.empty()) {
        return 0.0;
    }
    return eval(static_cast<int>(nodes_.size()) - 1, species, parameters);
}

double Expr::eval(int idx, std::span<const double> species,
                  std::span<const double> parameters) const {
    const Node& n = nodes_[static_cast<std::size_t>(idx)];
    switch (n.op) {
    case Op::number:
        return n.value;
    case Op::species:
        return std::max(species[n.index], 0.0);
    case Op::parameter:
        return parameters[n.index];
    case Op::add:
        return eval(n.args[0], species, parameters) + eval(n.args[1], species, parameters);
    case Op::sub:
        return eval(n.args[0], species, parameters) - eval(n.args[1], species, parameters);
    case Op::mul:
        return eval(n.args[0], species, parameters) * eval(n.args[1], species, parameters);
    case Op::div:
        return eval(n.args[0], species, parameters) / eval(n.args[1], species, parameters);
    case Op::pow: {
        const double base = eval(n.args[0], species, parameters);
        const double ex = eval(n.args[1], species, parameters);
        if (ex == 2.0) {
            return base * base;
        }
        return std::pow(base, ex);
    }
    case Op::neg:
        return -eval(n.args[0], species, parameters);
    case Op::hill: {
        const double x = eval(n.args[0], species, parameters);
        const double k = eval(n.args[1], species, parameters);
        const double h = eval(n.args[2], species, parameters);
        const double xn = std::pow(x, h);
        const double denom = std::pow(k, h) + xn;
        return denom == 0.0 ? 0.0 : xn / denom;
    }
    }
    return 0.0;
}

std::string Expr::to_string(const std::vector<std::string>& species_names,
                            const std::vector<std::string>& parameter_names) const {
    if (nodes_.empty()) {
        return "0";
    }
    return render(static_cast<int>(nodes_.size()) - 1, 0, false, species_names, parameter_names);
}

std::string Expr::render(int idx, int parent_prec, bool right_child,
                         const std::vector<std::string>& sn,
                         const std::vector<std::string>& pn) const {
    const Node& n = nodes_[static_cast<std::size_t>(idx)];
    const int prec = precedence(n.op);
    std::string out;
    switch (n.op) {
    case Op::number:
        out = format_real(n.value);
        if (n.value < 0) {
            out = "(" + out + ")";
        }
        return out;
    case Op::species:
        return sn.at(n.index);
    case Op::parameter:
        return pn.at(n.index);
    case Op::hill:
        return "hill(" + render(n.args[0], 0, false, sn, pn) + ", " +
               render(n.args[1], 0, false, sn, pn) + ", " + render(n.args[2], 0, false, sn, pn) +
               ")";
    case Op::neg:
        out = "-" + render(n.args[0], prec, false, sn, pn);
        break;
    case Op::pow:
        // right associative: parenthesize a pow on the left
        out = render(n.args[0], prec + 1, false, sn, pn) + "^" +
              render(n.args[1], prec, false, sn, pn);
        break;
    default: {
        const char* sym = n.op == Op::add ? " + " : n.op == Op::sub ? " - " : n.op == Op::mul ? " * " : " / ";
        out = render(n.args[0], prec, false, sn, pn) + sym + render(n.args[1], prec, true, sn, pn);
        break;
    }
    }
    const bool needs_paren = prec < parent_prec || (prec == parent_prec && right_child);
    return needs_paren ? "(" + out + ")" : out;
}

void Expr::collect_species(std::vector<std::size_t>& out) const {
    for (const auto& n : nodes_) {
        if (n.op == Op::species) {
            out.push_back(n.index);
        }
    }
}

void Expr::collect_parameters(std::vector<std::size_t>& out) const {
    for (const auto& n : nodes_) {
        if (n.op == Op::parameter) {
            out.push_back(n.index);
        }
    }
}

}  // namespace hybridsim
