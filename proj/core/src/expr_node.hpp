#pragma once

#include "ostro/expr.hpp"

namespace ostro {

struct Expr::Node {
    ExprKind kind = ExprKind::constant;
    double value = 0.0;
    int index = 0;  // coordinate order or power exponent
    Function fn = Function::sin;
    std::string name;
    std::vector<Expr> children;
    bool canonical = true;
};

struct ExprAccess {
    static const Expr::Node& node(const Expr& e) { return *e.node_; }
    static Expr make(ExprKind kind, std::vector<Expr> children, int index = 0,
                     Function fn = Function::sin, bool canonical = true);
};

inline double int_pow(double base, int n)
{
    double r = 1.0;
    double p = base;
    for (unsigned m = static_cast<unsigned>(n < 0 ? -n : n); m != 0; m >>= 1) {
        if (m & 1U) r *= p;
        p *= p;
    }
    return n < 0 ? 1.0 / r : r;
}

}  // namespace ostro
