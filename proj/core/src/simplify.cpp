#include "ostro/expr.hpp"

#include "expr_node.hpp"

#include <algorithm>
#include <cmath>

namespace ostro {

namespace {

bool is_canonical(const Expr& e) { return ExprAccess::node(e).canonical; }

Expr node(ExprKind kind, std::vector<Expr> children, int index = 0, Function fn = Function::sin)
{
    return ExprAccess::make(kind, std::move(children), index, fn, true);
}

Expr make_sum(std::vector<Expr> terms);
Expr make_product(std::vector<Expr> factors);
Expr make_power(const Expr& base, int n);

// Splits a canonical term into numeric coefficient and monomial.
std::pair<double, Expr> split_coefficient(const Expr& term)
{
    if (term.is(ExprKind::product)) {
        const auto ops = term.operands();
        if (ops.front().is(ExprKind::constant)) {
            std::vector<Expr> rest(ops.begin() + 1, ops.end());
            if (rest.size() == 1) return {ops.front().value(), rest.front()};
            return {ops.front().value(), node(ExprKind::product, std::move(rest))};
        }
    }
    return {1.0, term};
}

Expr scale(double coeff, const Expr& monomial)
{
    if (coeff == 1.0) return monomial;
    std::vector<Expr> factors{Expr::constant(coeff)};
    if (monomial.is(ExprKind::product)) {
        factors.insert(factors.end(), monomial.operands().begin(), monomial.operands().end());
    } else {
        factors.push_back(monomial);
    }
    return node(ExprKind::product, std::move(factors));
}

Expr make_sum(std::vector<Expr> terms)
{
    std::vector<Expr> flat;
    flat.reserve(terms.size());
    for (auto& t : terms) {
        if (t.is(ExprKind::sum)) {
            flat.insert(flat.end(), t.operands().begin(), t.operands().end());
        } else {
            flat.push_back(std::move(t));
        }
    }

    double constant = 0.0;
    std::map<Expr, double, ExprLess> like_terms;
    for (const auto& t : flat) {
        if (t.is(ExprKind::constant)) {
            constant += t.value();
            continue;
        }
        auto [c, mono] = split_coefficient(t);
        like_terms[mono] += c;
    }

    std::vector<Expr> out;
    if (constant != 0.0) out.push_back(Expr::constant(constant));
    for (const auto& [mono, c] : like_terms) {
        if (c != 0.0) out.push_back(scale(c, mono));
    }
    if (out.empty()) return Expr::constant(0.0);
    if (out.size() == 1) return out.front();
    std::sort(out.begin(), out.end(), ExprLess{});
    return node(ExprKind::sum, std::move(out));
}

// Distributes a product of two canonical expressions over their sum terms.
Expr multiply_out(const Expr& a, const Expr& b)
{
    const auto terms_of = [](const Expr& e) {
        return e.is(ExprKind::sum) ? std::vector<Expr>(e.operands().begin(), e.operands().end())
                                   : std::vector<Expr>{e};
    };
    const auto ta = terms_of(a);
    const auto tb = terms_of(b);
    std::vector<Expr> out;
    out.reserve(ta.size() * tb.size());
    for (const auto& x : ta) {
        for (const auto& y : tb) out.push_back(make_product({x, y}));
    }
    return make_sum(std::move(out));
}

Expr make_product(std::vector<Expr> factors)
{
    double coeff = 1.0;
    std::map<Expr, int, ExprLess> exponents;
    const auto absorb = [&](const Expr& f) {
        if (f.is(ExprKind::constant)) {
            coeff *= f.value();
        } else if (f.is(ExprKind::power)) {
            exponents[f.base()] += f.exponent();
        } else {
            exponents[f] += 1;
        }
    };
    for (const auto& f : factors) {
        if (f.is(ExprKind::product)) {
            for (const auto& g : f.operands()) absorb(g);
        } else {
            absorb(f);
        }
    }
    if (coeff == 0.0) return Expr::constant(0.0);

    std::vector<Expr> plain;
    std::vector<Expr> sums;
    for (const auto& [base, n] : exponents) {
        if (n == 0) continue;
        const Expr p = make_power(base, n);
        switch (p.kind()) {
        case ExprKind::constant: coeff *= p.value(); break;
        case ExprKind::product:
            for (const auto& g : p.operands()) {
                if (g.is(ExprKind::constant)) {
                    coeff *= g.value();
                } else {
                    plain.push_back(g);
                }
            }
            break;
        case ExprKind::sum: sums.push_back(p); break;
        default: plain.push_back(p); break;
        }
    }
    if (coeff == 0.0) return Expr::constant(0.0);

    if (!sums.empty()) {
        Expr acc = make_product([&] {
            std::vector<Expr> v{Expr::constant(coeff)};
            v.insert(v.end(), plain.begin(), plain.end());
            return v;
        }());
        for (const auto& s : sums) acc = multiply_out(acc, s);
        return acc;
    }

    std::sort(plain.begin(), plain.end(), ExprLess{});
    if (plain.empty()) return Expr::constant(coeff);
    if (coeff == 1.0 && plain.size() == 1) return plain.front();
    if (coeff != 1.0) plain.insert(plain.begin(), Expr::constant(coeff));
    return node(ExprKind::product, std::move(plain));
}

Expr make_power(const Expr& base, int n)
{
    if (n == 0) return Expr::constant(1.0);
    if (n == 1) return base;
    switch (base.kind()) {
    case ExprKind::constant: {
        const double v = int_pow(base.value(), n);
        if (std::isfinite(v)) return Expr::constant(v);
        // Reciprocal of zero (or of an overflow) stays symbolic as c^-1.
        if (n < -1) {
            const double magnitude = int_pow(base.value(), -n);
            if (std::isfinite(magnitude)) return node(ExprKind::power, {Expr::constant(magnitude)}, -1);
        }
        return node(ExprKind::power, {base}, n);
    }
    case ExprKind::power: return make_power(base.base(), base.exponent() * n);
    case ExprKind::product: {
        std::vector<Expr> factors;
        factors.reserve(base.operands().size());
        for (const auto& f : base.operands()) factors.push_back(make_power(f, n));
        return make_product(std::move(factors));
    }
    case ExprKind::sum: {
        if (n == -1) return node(ExprKind::power, {base}, -1);
        if (n < 0) {
            const Expr expanded = make_power(base, -n);
            if (expanded.is(ExprKind::sum)) return node(ExprKind::power, {expanded}, -1);
            return make_power(expanded, -1);
        }
        Expr acc = base;
        for (int i = 1; i < n; ++i) acc = multiply_out(acc, base);
        return acc;
    }
    default: return node(ExprKind::power, {base}, n);
    }
}

Expr make_call(Function f, const Expr& arg)
{
    if (arg.is(ExprKind::constant)) {
        double v = 0.0;
        switch (f) {
        case Function::sin: v = std::sin(arg.value()); break;
        case Function::cos: v = std::cos(arg.value()); break;
        case Function::exp: v = std::exp(arg.value()); break;
        }
        if (std::isfinite(v)) return Expr::constant(v);
    }
    return node(ExprKind::call, {arg}, 0, f);
}

std::vector<Expr> simplified(std::span<const Expr> ops)
{
    std::vector<Expr> out;
    out.reserve(ops.size());
    for (const auto& op : ops) out.push_back(simplify(op));
    return out;
}

}  // namespace

Expr simplify(const Expr& e)
{
    if (is_canonical(e)) return e;
    const auto& n = ExprAccess::node(e);
    switch (e.kind()) {
    case ExprKind::sum: return make_sum(simplified(n.children));
    case ExprKind::product: return make_product(simplified(n.children));
    case ExprKind::power: return make_power(simplify(n.children.front()), n.index);
    case ExprKind::call: return make_call(n.fn, simplify(n.children.front()));
    default: return e;
    }
}

Expr Expr::sum(std::vector<Expr> terms)
{
    for (auto& t : terms) t = simplify(t);
    return make_sum(std::move(terms));
}

Expr Expr::product(std::vector<Expr> factors)
{
    for (auto& f : factors) f = simplify(f);
    return make_product(std::move(factors));
}

Expr Expr::power(Expr base, int exponent) { return make_power(simplify(base), exponent); }

Expr Expr::call(Function f, Expr argument) { return make_call(f, simplify(argument)); }

}  // namespace ostro
