#include "ostro/expr.hpp"

#include <functional>

namespace ostro {

namespace {

using LeafRule = std::function<Expr(const Expr&)>;

// Chain-rule differentiation; `leaf` gives the derivative of every atom.
Expr differentiate(const Expr& e, const LeafRule& leaf)
{
    switch (e.kind()) {
    case ExprKind::constant:
    case ExprKind::parameter:
    case ExprKind::time:
    case ExprKind::coord: return leaf(e);
    case ExprKind::sum: {
        std::vector<Expr> terms;
        terms.reserve(e.operands().size());
        for (const auto& op : e.operands()) terms.push_back(differentiate(op, leaf));
        return Expr::sum(std::move(terms));
    }
    case ExprKind::product: {
        const auto ops = e.operands();
        std::vector<Expr> terms;
        for (std::size_t i = 0; i < ops.size(); ++i) {
            Expr d = differentiate(ops[i], leaf);
            if (d.is_constant(0.0)) continue;
            std::vector<Expr> factors(ops.begin(), ops.end());
            factors[i] = std::move(d);
            terms.push_back(Expr::product(std::move(factors)));
        }
        if (terms.empty()) return Expr::constant(0.0);
        return Expr::sum(std::move(terms));
    }
    case ExprKind::power: {
        Expr d = differentiate(e.base(), leaf);
        if (d.is_constant(0.0)) return d;
        const int n = e.exponent();
        return Expr::product({Expr::constant(n), Expr::power(e.base(), n - 1), std::move(d)});
    }
    case ExprKind::call: {
        Expr d = differentiate(e.argument(), leaf);
        if (d.is_constant(0.0)) return d;
        const Expr& a = e.argument();
        switch (e.function()) {
        case Function::sin: return Expr::product({cos(a), std::move(d)});
        case Function::cos: return Expr::product({Expr::constant(-1.0), sin(a), std::move(d)});
        case Function::exp: return Expr::product({exp(a), std::move(d)});
        }
    }
    }
    return Expr::constant(0.0);
}

using Rewrite = std::function<std::optional<Expr>(const Expr&)>;

Expr rewrite_leaves(const Expr& e, const Rewrite& rule)
{
    switch (e.kind()) {
    case ExprKind::sum:
    case ExprKind::product: {
        std::vector<Expr> ops;
        ops.reserve(e.operands().size());
        for (const auto& op : e.operands()) ops.push_back(rewrite_leaves(op, rule));
        return e.is(ExprKind::sum) ? Expr::sum(std::move(ops)) : Expr::product(std::move(ops));
    }
    case ExprKind::power: return Expr::power(rewrite_leaves(e.base(), rule), e.exponent());
    case ExprKind::call: return Expr::call(e.function(), rewrite_leaves(e.argument(), rule));
    default:
        if (auto r = rule(e)) return *r;
        return simplify(e);
    }
}

}  // namespace

Expr partial(const Expr& e, int order)
{
    return differentiate(simplify(e), [order](const Expr& leaf) {
        const bool hit = leaf.is(ExprKind::coord) && leaf.order() == order;
        return Expr::constant(hit ? 1.0 : 0.0);
    });
}

Expr total_time_derivative(const Expr& e)
{
    return differentiate(simplify(e), [](const Expr& leaf) {
        if (leaf.is(ExprKind::time)) return Expr::constant(1.0);
        if (leaf.is(ExprKind::coord)) return Expr::coord(leaf.order() + 1);
        return Expr::constant(0.0);
    });
}

Expr substitute(const Expr& e, int order, const Expr& replacement)
{
    return rewrite_leaves(e, [&](const Expr& leaf) -> std::optional<Expr> {
        if (leaf.is(ExprKind::coord) && leaf.order() == order) return replacement;
        return std::nullopt;
    });
}

Expr bind_parameters(const Expr& e, const std::map<std::string, double, std::less<>>& values)
{
    return rewrite_leaves(e, [&](const Expr& leaf) -> std::optional<Expr> {
        if (!leaf.is(ExprKind::parameter)) return std::nullopt;
        const auto it = values.find(leaf.name());
        if (it == values.end()) return std::nullopt;
        return Expr::constant(it->second);
    });
}

}  // namespace ostro
