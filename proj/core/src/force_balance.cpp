#include "ostro/dynamics.hpp"
#include "ostro/variational.hpp"

namespace ostro {

std::vector<ForceBalanceRow> force_balance_eval(const Lagrangian& lagrangian, const EquationOfMotion& eom,
                                                const Trajectory& trajectory)
{
    if (static_cast<int>(trajectory.dimension()) < eom.order)
        throw std::invalid_argument("trajectory state has " + std::to_string(trajectory.dimension()) +
                                    " components; force balance needs " + std::to_string(eom.order));

    const Lagrangian bound = lagrangian.bound();
    const MomentumSet ladders = ladder_forces_momenta(bound);
    const Expr lhs = Expr::sum(ladders.ladder_forces);
    std::vector<Expr> rhs_terms;
    for (std::size_t a = 0; a < ladders.ladder_momenta.size(); ++a)
        rhs_terms.push_back(time_derivative_n(ladders.ladder_momenta[a], static_cast<int>(a) + 1));
    const Expr rhs = Expr::sum(std::move(rhs_terms));
    const Expr residual = bind_parameters(eom.residual, lagrangian.parameters());

    int needed = eom.order - 1;
    for (const Expr* e : {&lhs, &rhs, &residual}) needed = std::max(needed, max_coord_order(*e).value_or(0));

    DerivativeChain chain(eom, lagrangian.parameters());
    std::vector<ForceBalanceRow> rows;
    rows.reserve(trajectory.samples.size());
    for (const auto& s : trajectory.samples) {
        const auto c = chain.evaluate(s, needed);
        ForceBalanceRow row;
        row.t = s.t;
        row.lhs = evaluate(lhs, s.t, c);
        row.rhs = evaluate(rhs, s.t, c);
        row.el_residual = evaluate(residual, s.t, c);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace ostro
