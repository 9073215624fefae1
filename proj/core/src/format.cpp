#include "ostro/parse.hpp"

#include <array>
#include <charconv>
#include <cmath>

namespace ostro {

std::string format_number(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
    return std::string(buf.data(), ptr);
}

namespace {

bool is_atom(const Expr& e)
{
    switch (e.kind()) {
    case ExprKind::parameter:
    case ExprKind::time:
    case ExprKind::coord:
    case ExprKind::call: return true;
    default: return false;
    }
}

std::string format_power_base(const Expr& b)
{
    if (is_atom(b)) return format(b);
    if (b.is(ExprKind::constant) && b.value() >= 0.0) return format(b);
    return "(" + format(b) + ")";
}

std::string format_power(const Expr& base, int n)
{
    std::string s = format_power_base(base);
    if (n != 1) s += "^" + std::to_string(n);
    return s;
}

// Factor inside a product numerator.
std::string format_factor(const Expr& f)
{
    switch (f.kind()) {
    case ExprKind::sum:
    case ExprKind::product: return "(" + format(f) + ")";
    case ExprKind::constant: return f.value() < 0.0 ? "(" + format(f) + ")" : format(f);
    case ExprKind::power: return format_power(f.base(), f.exponent());
    default: return format(f);
    }
}

std::string format_product(double coeff, std::span<const Expr> factors)
{
    std::vector<const Expr*> numer;
    std::vector<const Expr*> denom;
    for (const auto& f : factors) {
        if (f.is(ExprKind::power) && f.exponent() < 0) {
            denom.push_back(&f);
        } else {
            numer.push_back(&f);
        }
    }

    if (coeff == -1.0 && !factors.empty()) {
        const std::string inner = format_product(1.0, factors);
        if (denom.empty() && numer.size() == 1 && is_atom(*numer.front())) return "-" + inner;
        return "-(" + inner + ")";
    }

    std::string s;
    if (coeff != 1.0 || numer.empty()) s = format_number(coeff);
    for (const auto* f : numer) {
        if (!s.empty()) s += "*";
        s += format_factor(*f);
    }
    for (const auto* f : denom) s += "/" + format_power(f->base(), -f->exponent());
    return s;
}

std::pair<double, std::span<const Expr>> coefficient_of(const Expr& e)
{
    const auto ops = e.operands();
    if (e.is(ExprKind::product) && !ops.empty() && ops.front().is(ExprKind::constant))
        return {ops.front().value(), ops.subspan(1)};
    return {1.0, ops};
}

bool is_negative_term(const Expr& t)
{
    if (t.is(ExprKind::constant)) return t.value() < 0.0;
    if (t.is(ExprKind::product)) return coefficient_of(t).first < 0.0;
    return false;
}

std::string format_negated(const Expr& t)
{
    if (t.is(ExprKind::constant)) return format_number(-t.value());
    const auto [c, rest] = coefficient_of(t);
    return format_product(-c, rest);
}

}  // namespace

std::string format(const Expr& e)
{
    switch (e.kind()) {
    case ExprKind::constant: return format_number(e.value());
    case ExprKind::parameter: return e.name();
    case ExprKind::time: return "t";
    case ExprKind::coord: return e.order() == 0 ? "x" : "d(x," + std::to_string(e.order()) + ")";
    case ExprKind::call:
        return std::string(function_name(e.function())) + "(" + format(e.argument()) + ")";
    case ExprKind::power:
        if (e.exponent() < 0) return format_product(1.0, std::span<const Expr>(&e, 1));
        return format_power(e.base(), e.exponent());
    case ExprKind::product: {
        const auto [c, rest] = coefficient_of(e);
        return format_product(c, rest);
    }
    case ExprKind::sum: {
        std::string s;
        bool first = true;
        for (const auto& t : e.operands()) {
            const bool nested = t.is(ExprKind::sum);
            if (first) {
                s = format(t);
            } else if (!nested && is_negative_term(t)) {
                s += " - " + format_negated(t);
            } else {
                s += " + " + (nested ? "(" + format(t) + ")" : format(t));
            }
            first = false;
        }
        return s;
    }
    }
    return {};
}

}  // namespace ostro
