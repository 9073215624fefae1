#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ostro {

/// Node kinds of a symbolic expression. The declaration order is also the
/// canonical sort order: constants, parameters, time, coordinates, then
/// composites.
enum class ExprKind { constant, parameter, time, coord, power, call, product, sum };

enum class Function { sin, cos, exp };

std::string_view function_name(Function f);

/// Immutable expression tree over time `t`, the derivative coordinates
/// x^(k) and named parameters.
///
/// Every value produced by the public factories is canonical: sums and
/// products are flattened, like terms and like bases are merged, numeric
/// constants are folded and operands are sorted. Non-canonical trees can only
/// be built through the `raw` namespace and are normalised by `simplify`.
class Expr {
public:
    /// Constant zero.
    Expr();

    static Expr constant(double value);
    static Expr parameter(std::string name);
    static Expr time();
    static Expr coord(int order);
    static Expr sum(std::vector<Expr> terms);
    static Expr product(std::vector<Expr> factors);
    static Expr power(Expr base, int exponent);
    static Expr call(Function f, Expr argument);

    ExprKind kind() const noexcept;
    bool is(ExprKind k) const noexcept { return kind() == k; }
    bool is_constant(double v) const noexcept;

    double value() const;                 // constant
    const std::string& name() const;      // parameter
    int order() const;                    // coord
    int exponent() const;                 // power
    Function function() const;            // call
    const Expr& base() const;             // power
    const Expr& argument() const;         // call
    std::span<const Expr> operands() const noexcept;  // sum, product

    friend bool operator==(const Expr& a, const Expr& b);

private:
    struct Node;
    explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;

    friend struct ExprAccess;
};

/// Total canonical order; returns <0, 0, >0.
int compare(const Expr& a, const Expr& b);

struct ExprLess {
    bool operator()(const Expr& a, const Expr& b) const { return compare(a, b) < 0; }
};

/// Builders that keep operands exactly as given (no flattening, folding or
/// sorting). Only structural validity is checked.
namespace raw {
Expr sum(std::vector<Expr> terms);
Expr product(std::vector<Expr> factors);
Expr power(Expr base, int exponent);
Expr call(Function f, Expr argument);
}  // namespace raw

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr pow(const Expr& base, int exponent);
Expr sin(const Expr& a);
Expr cos(const Expr& a);
Expr exp(const Expr& a);

/// Values for every symbol an expression may reference.
struct Binding {
    double time = 0.0;
    std::vector<double> derivs;  ///< derivs[k] is the value of x^(k)
    std::map<std::string, double, std::less<>> parameters;
};

class EvaluationError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class MissingSymbolError : public EvaluationError {
public:
    explicit MissingSymbolError(std::string symbol);
    const std::string& symbol() const noexcept { return symbol_; }

private:
    std::string symbol_;
};

class NonFiniteError : public EvaluationError {
    using EvaluationError::EvaluationError;
};

/// Rebuilds `e` through the canonicalising factories.
Expr simplify(const Expr& e);

/// d e / d x^(order), every derivative coordinate treated as independent.
Expr partial(const Expr& e, int order);

/// d/dt by the chain rule: t -> 1, x^(k) -> x^(k+1).
Expr total_time_derivative(const Expr& e);

/// Replaces every x^(order) by `replacement`.
Expr substitute(const Expr& e, int order, const Expr& replacement);

/// Replaces every bound parameter by its numeric value.
Expr bind_parameters(const Expr& e, const std::map<std::string, double, std::less<>>& values);

double evaluate(const Expr& e, const Binding& b);

/// Same as `evaluate`, with derivative values supplied as a view.
double evaluate(const Expr& e, double time, std::span<const double> derivs,
                const std::map<std::string, double, std::less<>>& parameters = {});

/// Highest x^(k) order referenced, or nullopt when no coordinate occurs.
std::optional<int> max_coord_order(const Expr& e);
bool depends_on_time(const Expr& e);
bool depends_on_coord(const Expr& e, int order);
std::set<std::string> parameter_names(const Expr& e);

}  // namespace ostro
