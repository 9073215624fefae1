#pragma once

#include "ostro/expr.hpp"

#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace ostro {

using Parameters = std::map<std::string, double, std::less<>>;

struct Trajectory;

/// A Lagrangian L(t, x, x', ..., x^(N)) with optional numeric parameter values.
///
/// The order N is the highest derivative occurring in the simplified body,
/// clamped below at 1 so that a Lagrangian with no velocity dependence still
/// describes a (degenerate) first-order system.
class Lagrangian {
public:
    explicit Lagrangian(Expr body, Parameters parameters = {});

    static Lagrangian parse(std::string_view text, Parameters parameters = {});

    const Expr& body() const noexcept { return body_; }
    int order() const noexcept { return order_; }
    const Parameters& parameters() const noexcept { return parameters_; }

    /// Copy with every known parameter replaced by its value. The order is
    /// recomputed, so binding a coefficient to zero can lower it.
    Lagrangian bound() const;

    bool time_independent() const { return !depends_on_time(body_); }

private:
    Expr body_;
    int order_;
    Parameters parameters_;
};

/// Higher-order Euler-Lagrange equation, residual = 0 on solutions.
struct EquationOfMotion {
    Expr residual;
    int order = 0;  ///< 2N
    std::optional<Expr> explicit_rhs;  ///< x^(2N) = explicit_rhs
};

class DegenerateLagrangian : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Force and momentum ladders attached to a Lagrangian.
struct MomentumSet {
    std::vector<Expr> ladder_forces;   ///< dL/dx^(2a), a = 0..floor(N/2)
    std::vector<Expr> ladder_momenta;  ///< dL/dx^(2a+1), a = 0..ceil(N/2)-1
    std::vector<Expr> ostro_momenta;  ///< Ostrogradski p_k, k = 0..N-1
    Expr hamiltonian;
};

/// sum_{n=0}^{N} (-1)^n (d/dt)^n dL/dx^(n); the n = 0 term enters with a plus sign.
EquationOfMotion euler_lagrange(const Lagrangian& lagrangian);

/// Isolates x^(2N). Requires the residual to be affine in x^(2N) with a
/// coefficient free of t and of every coordinate; throws DegenerateLagrangian
/// otherwise.
EquationOfMotion solve_explicit(EquationOfMotion eom);

/// Fills ladder_forces and ladder_momenta only.
MomentumSet ladder_forces_momenta(const Lagrangian& lagrangian);

/// p_k = sum_{j=k+1}^{N} (-1)^(j-k-1) (d/dt)^(j-k-1) dL/dx^(j).
std::vector<Expr> ostrogradski_momenta(const Lagrangian& lagrangian);

/// H = sum_k p_k x^(k+1) - L.
Expr ostrogradski_hamiltonian(const Lagrangian& lagrangian);

/// Every ladder plus the Hamiltonian.
MomentumSet momentum_set(const Lagrangian& lagrangian);

/// Applies d/dt `times` times.
Expr time_derivative_n(const Expr& e, int times);

struct ForceBalanceRow {
    double t = 0.0;
    double lhs = 0.0;          ///< sum_a F^(a)
    double rhs = 0.0;          ///< sum_a (d/dt)^(a+1) p^(a)
    double el_residual = 0.0;  ///< Euler-Lagrange residual at the same point
};

/// Evaluates the force/momentum balance along `trajectory`. Both sides are
/// reported as computed; only el_residual is expected to vanish.
/// `eom` must be the explicit equation of motion of the bound Lagrangian.
std::vector<ForceBalanceRow> force_balance_eval(const Lagrangian& lagrangian,
                                                const EquationOfMotion& eom,
                                                const Trajectory& trajectory);

}  // namespace ostro
