#include "ostro/expr.hpp"

#include "expr_node.hpp"

#include <algorithm>
#include <cmath>

namespace ostro {

std::string_view function_name(Function f)
{
    switch (f) {
    case Function::sin: return "sin";
    case Function::cos: return "cos";
    case Function::exp: return "exp";
    }
    return "?";
}

Expr::Expr() : Expr(Expr::constant(0.0)) {}

Expr Expr::constant(double value)
{
    Node n;
    n.kind = ExprKind::constant;
    n.value = value;
    return Expr(std::make_shared<const Node>(std::move(n)));
}

Expr Expr::parameter(std::string name)
{
    if (name.empty()) throw std::invalid_argument("parameter name must not be empty");
    Node n;
    n.kind = ExprKind::parameter;
    n.name = std::move(name);
    return Expr(std::make_shared<const Node>(std::move(n)));
}

Expr Expr::time()
{
    Node n;
    n.kind = ExprKind::time;
    return Expr(std::make_shared<const Node>(std::move(n)));
}

Expr Expr::coord(int order)
{
    if (order < 0) throw std::invalid_argument("derivative order must be >= 0");
    Node n;
    n.kind = ExprKind::coord;
    n.index = order;
    return Expr(std::make_shared<const Node>(std::move(n)));
}

ExprKind Expr::kind() const noexcept { return node_->kind; }

bool Expr::is_constant(double v) const noexcept
{
    return node_->kind == ExprKind::constant && node_->value == v;
}

double Expr::value() const
{
    if (!is(ExprKind::constant)) throw std::logic_error("Expr::value on non-constant");
    return node_->value;
}

const std::string& Expr::name() const
{
    if (!is(ExprKind::parameter)) throw std::logic_error("Expr::name on non-parameter");
    return node_->name;
}

int Expr::order() const
{
    if (!is(ExprKind::coord)) throw std::logic_error("Expr::order on non-coordinate");
    return node_->index;
}

int Expr::exponent() const
{
    if (!is(ExprKind::power)) throw std::logic_error("Expr::exponent on non-power");
    return node_->index;
}

Function Expr::function() const
{
    if (!is(ExprKind::call)) throw std::logic_error("Expr::function on non-call");
    return node_->fn;
}

const Expr& Expr::base() const
{
    if (!is(ExprKind::power)) throw std::logic_error("Expr::base on non-power");
    return node_->children.front();
}

const Expr& Expr::argument() const
{
    if (!is(ExprKind::call)) throw std::logic_error("Expr::argument on non-call");
    return node_->children.front();
}

std::span<const Expr> Expr::operands() const noexcept
{
    if (is(ExprKind::sum) || is(ExprKind::product)) return node_->children;
    return {};
}

bool operator==(const Expr& a, const Expr& b) { return compare(a, b) == 0; }

int compare(const Expr& a, const Expr& b)
{
    if (&ExprAccess::node(a) == &ExprAccess::node(b)) return 0;
    if (a.kind() != b.kind()) return a.kind() < b.kind() ? -1 : 1;
    const auto& na = ExprAccess::node(a);
    const auto& nb = ExprAccess::node(b);
    switch (a.kind()) {
    case ExprKind::constant:
        if (na.value < nb.value) return -1;
        if (nb.value < na.value) return 1;
        return 0;
    case ExprKind::parameter: {
        const int c = na.name.compare(nb.name);
        return c < 0 ? -1 : (c > 0 ? 1 : 0);
    }
    case ExprKind::time: return 0;
    case ExprKind::coord:
    case ExprKind::power:
    case ExprKind::call:
        if (a.kind() == ExprKind::call && na.fn != nb.fn) return na.fn < nb.fn ? -1 : 1;
        if (a.kind() != ExprKind::coord) {
            if (const int c = compare(na.children.front(), nb.children.front()); c != 0) return c;
        }
        if (na.index != nb.index) return na.index < nb.index ? -1 : 1;
        return 0;
    case ExprKind::product:
    case ExprKind::sum: {
        const auto n = std::min(na.children.size(), nb.children.size());
        for (std::size_t i = 0; i < n; ++i) {
            if (const int c = compare(na.children[i], nb.children[i]); c != 0) return c;
        }
        if (na.children.size() != nb.children.size())
            return na.children.size() < nb.children.size() ? -1 : 1;
        return 0;
    }
    }
    return 0;
}

Expr ExprAccess::make(ExprKind kind, std::vector<Expr> children, int index, Function fn,
                      bool canonical)
{
    Expr::Node n;
    n.canonical = canonical;
    n.kind = kind;
    n.children = std::move(children);
    n.index = index;
    n.fn = fn;
    return Expr(std::make_shared<const Expr::Node>(std::move(n)));
}

namespace raw {

Expr sum(std::vector<Expr> terms)
{
    if (terms.size() < 2) throw std::invalid_argument("sum needs at least two operands");
    return ExprAccess::make(ExprKind::sum, std::move(terms), 0, Function::sin, false);
}

Expr product(std::vector<Expr> factors)
{
    if (factors.size() < 2) throw std::invalid_argument("product needs at least two operands");
    return ExprAccess::make(ExprKind::product, std::move(factors), 0, Function::sin, false);
}

Expr power(Expr base, int exponent)
{
    if (exponent == 0) throw std::invalid_argument("power exponent must be non-zero");
    return ExprAccess::make(ExprKind::power, {std::move(base)}, exponent, Function::sin, false);
}

Expr call(Function f, Expr argument)
{
    return ExprAccess::make(ExprKind::call, {std::move(argument)}, 0, f, false);
}

}  // namespace raw

Expr operator+(const Expr& a, const Expr& b) { return Expr::sum({a, b}); }
Expr operator-(const Expr& a, const Expr& b) { return Expr::sum({a, -b}); }
Expr operator-(const Expr& a) { return Expr::product({Expr::constant(-1.0), a}); }
Expr operator*(const Expr& a, const Expr& b) { return Expr::product({a, b}); }
Expr operator/(const Expr& a, const Expr& b) { return Expr::product({a, Expr::power(b, -1)}); }
Expr pow(const Expr& base, int exponent) { return Expr::power(base, exponent); }
Expr sin(const Expr& a) { return Expr::call(Function::sin, a); }
Expr cos(const Expr& a) { return Expr::call(Function::cos, a); }
Expr exp(const Expr& a) { return Expr::call(Function::exp, a); }

MissingSymbolError::MissingSymbolError(std::string symbol)
    : EvaluationError("missing value for symbol '" + symbol + "'"), symbol_(std::move(symbol))
{
}

namespace {

struct EvalContext {
    double time;
    std::span<const double> derivs;
    const std::map<std::string, double, std::less<>>& parameters;
};

double eval_node(const Expr& e, const EvalContext& ctx)
{
    switch (e.kind()) {
    case ExprKind::constant: return e.value();
    case ExprKind::parameter: {
        const auto it = ctx.parameters.find(e.name());
        if (it == ctx.parameters.end()) throw MissingSymbolError(e.name());
        return it->second;
    }
    case ExprKind::time: return ctx.time;
    case ExprKind::coord: {
        const auto k = static_cast<std::size_t>(e.order());
        if (k >= ctx.derivs.size()) throw MissingSymbolError("d(x," + std::to_string(k) + ")");
        return ctx.derivs[k];
    }
    case ExprKind::sum: {
        double acc = 0.0;
        for (const auto& op : e.operands()) acc += eval_node(op, ctx);
        return acc;
    }
    case ExprKind::product: {
        double acc = 1.0;
        for (const auto& op : e.operands()) acc *= eval_node(op, ctx);
        return acc;
    }
    case ExprKind::power: {
        return int_pow(eval_node(e.base(), ctx), e.exponent());
    }
    case ExprKind::call: {
        const double a = eval_node(e.argument(), ctx);
        switch (e.function()) {
        case Function::sin: return std::sin(a);
        case Function::cos: return std::cos(a);
        case Function::exp: return std::exp(a);
        }
    }
    }
    return 0.0;
}

}  // namespace

double evaluate(const Expr& e, double time, std::span<const double> derivs,
                const std::map<std::string, double, std::less<>>& parameters)
{
    const EvalContext ctx{time, derivs, parameters};
    const double v = eval_node(e, ctx);
    if (!std::isfinite(v)) throw NonFiniteError("expression evaluated to a non-finite value");
    return v;
}

double evaluate(const Expr& e, const Binding& b)
{
    return evaluate(e, b.time, b.derivs, b.parameters);
}

std::optional<int> max_coord_order(const Expr& e)
{
    switch (e.kind()) {
    case ExprKind::coord: return e.order();
    case ExprKind::power: return max_coord_order(e.base());
    case ExprKind::call: return max_coord_order(e.argument());
    case ExprKind::sum:
    case ExprKind::product: {
        std::optional<int> best;
        for (const auto& op : e.operands()) {
            if (const auto k = max_coord_order(op); k && (!best || *k > *best)) best = k;
        }
        return best;
    }
    default: return std::nullopt;
    }
}

namespace {

template <class Pred>
bool any_leaf(const Expr& e, const Pred& pred)
{
    switch (e.kind()) {
    case ExprKind::power: return any_leaf(e.base(), pred);
    case ExprKind::call: return any_leaf(e.argument(), pred);
    case ExprKind::sum:
    case ExprKind::product:
        return std::any_of(e.operands().begin(), e.operands().end(),
                           [&](const Expr& op) { return any_leaf(op, pred); });
    default: return pred(e);
    }
}

void collect_parameters(const Expr& e, std::set<std::string>& out)
{
    switch (e.kind()) {
    case ExprKind::parameter: out.insert(e.name()); break;
    case ExprKind::power: collect_parameters(e.base(), out); break;
    case ExprKind::call: collect_parameters(e.argument(), out); break;
    case ExprKind::sum:
    case ExprKind::product:
        for (const auto& op : e.operands()) collect_parameters(op, out);
        break;
    default: break;
    }
}

}  // namespace

bool depends_on_time(const Expr& e)
{
    return any_leaf(e, [](const Expr& leaf) { return leaf.is(ExprKind::time); });
}

bool depends_on_coord(const Expr& e, int order)
{
    return any_leaf(e, [order](const Expr& leaf) {
        return leaf.is(ExprKind::coord) && leaf.order() == order;
    });
}

std::set<std::string> parameter_names(const Expr& e)
{
    std::set<std::string> out;
    collect_parameters(e, out);
    return out;
}

}  // namespace ostro
