#include "ostro/variational.hpp"

#include "ostro/parse.hpp"

namespace ostro {

namespace {

int lagrangian_order(const Expr& body) { return std::max(1, max_coord_order(body).value_or(0)); }

bool is_coordinate_free(const Expr& e) { return !max_coord_order(e) && !depends_on_time(e); }

}  // namespace

Lagrangian::Lagrangian(Expr body, Parameters parameters)
    : body_(simplify(body)), order_(lagrangian_order(body_)), parameters_(std::move(parameters))
{
}

Lagrangian Lagrangian::parse(std::string_view text, Parameters parameters)
{
    return Lagrangian(ostro::parse(text), std::move(parameters));
}

Lagrangian Lagrangian::bound() const { return Lagrangian(bind_parameters(body_, parameters_), parameters_); }

Expr time_derivative_n(const Expr& e, int times)
{
    Expr out = e;
    for (int i = 0; i < times && !out.is(ExprKind::constant); ++i) out = total_time_derivative(out);
    return out;
}

EquationOfMotion euler_lagrange(const Lagrangian& lagrangian)
{
    const int n_max = lagrangian.order();
    std::vector<Expr> terms;
    terms.reserve(static_cast<std::size_t>(n_max) + 1);
    for (int n = 0; n <= n_max; ++n) {
        Expr term = time_derivative_n(partial(lagrangian.body(), n), n);
        terms.push_back(n % 2 == 0 ? term : -term);
    }
    EquationOfMotion eom;
    eom.residual = Expr::sum(std::move(terms));
    eom.order = 2 * n_max;
    return eom;
}

EquationOfMotion solve_explicit(EquationOfMotion eom)
{
    const int top = eom.order;
    const Expr coefficient = partial(eom.residual, top);
    if (coefficient.is_constant(0.0))
        throw DegenerateLagrangian("coefficient of d(x," + std::to_string(top) +
                                   ") vanishes; the Lagrangian is degenerate");
    if (!is_coordinate_free(coefficient))
        throw DegenerateLagrangian("coefficient of d(x," + std::to_string(top) + ") is not constant: " +
                                   format(coefficient));
    const Expr remainder = substitute(eom.residual, top, Expr::constant(0.0));
    eom.explicit_rhs = -remainder / coefficient;
    return eom;
}

MomentumSet ladder_forces_momenta(const Lagrangian& lagrangian)
{
    const int n = lagrangian.order();
    MomentumSet out;
    for (int a = 0; a <= n / 2; ++a) out.ladder_forces.push_back(partial(lagrangian.body(), 2 * a));
    for (int a = 0; a <= (n + 1) / 2 - 1; ++a)
        out.ladder_momenta.push_back(partial(lagrangian.body(), 2 * a + 1));
    return out;
}

std::vector<Expr> ostrogradski_momenta(const Lagrangian& lagrangian)
{
    const int n = lagrangian.order();
    std::vector<Expr> partials;
    for (int j = 0; j <= n; ++j) partials.push_back(partial(lagrangian.body(), j));

    std::vector<Expr> momenta;
    for (int k = 0; k < n; ++k) {
        std::vector<Expr> terms;
        for (int j = k + 1; j <= n; ++j) {
            const int m = j - k - 1;
            Expr term = time_derivative_n(partials[static_cast<std::size_t>(j)], m);
            terms.push_back(m % 2 == 0 ? term : -term);
        }
        momenta.push_back(terms.size() == 1 ? terms.front() : Expr::sum(std::move(terms)));
    }
    return momenta;
}

Expr ostrogradski_hamiltonian(const Lagrangian& lagrangian)
{
    const auto momenta = ostrogradski_momenta(lagrangian);
    std::vector<Expr> terms;
    for (std::size_t k = 0; k < momenta.size(); ++k)
        terms.push_back(momenta[k] * Expr::coord(static_cast<int>(k) + 1));
    terms.push_back(-lagrangian.body());
    return Expr::sum(std::move(terms));
}

MomentumSet momentum_set(const Lagrangian& lagrangian)
{
    MomentumSet out = ladder_forces_momenta(lagrangian);
    out.ostro_momenta = ostrogradski_momenta(lagrangian);
    out.hamiltonian = ostrogradski_hamiltonian(lagrangian);
    return out;
}

}  // namespace ostro
