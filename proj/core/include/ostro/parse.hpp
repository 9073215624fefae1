#pragma once

#include "ostro/expr.hpp"

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ostro {

/// Syntax or semantic error in Lagrangian text; `offset` is the byte offset
/// of the offending token.
class ParseError : public std::runtime_error {
public:
    ParseError(std::string message, std::size_t offset);
    std::size_t offset() const noexcept { return offset_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    std::string detail_;
    std::size_t offset_;
};

/// Parses the expression language:
///
///     expr   := term (("+"|"-") term)*
///     term   := factor (("*"|"/") factor)*
///     factor := base ("^" integer)?
///     base   := number | param | coord | "(" expr ")" | func "(" expr ")" | "-" base
///     coord  := "x" "'"* | "d(x," integer ")"
///
/// `t` is time; `sin`, `cos`, `exp` are the only functions. The result is
/// canonical.
Expr parse(std::string_view text);

/// Renders `e` so that `parse(format(e)) == e`. Numbers use the shortest
/// round-trip decimal form.
std::string format(const Expr& e);

/// Shortest decimal string that reads back to exactly `v`.
std::string format_number(double v);

}  // namespace ostro
