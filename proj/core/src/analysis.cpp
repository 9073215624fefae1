#include "ostro/analysis.hpp"

#include "ostro/parse.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace ostro {

namespace {

// sum_{k=from}^{M} c[k] tau^(k-shift) / (k-shift)!
double taylor_tail(const std::vector<double>& c, double tau, std::size_t from, std::size_t shift)
{
    double term = 1.0;  // tau^(k-shift) / (k-shift)!
    double sum = 0.0;
    for (std::size_t k = shift; k < c.size(); ++k) {
        if (k > shift) term *= tau / static_cast<double>(k - shift);
        if (k >= from) sum += c[k] * term;
    }
    return sum;
}

void require_model(const TaylorModel& model)
{
    if (model.c.size() < 3) throw std::invalid_argument("Taylor model needs at least c[0], c[1], c[2]");
}

int needed_order(const Expr& e) { return max_coord_order(e).value_or(0); }

// Derivatives x..x^(max_order) at a state, taken from the state itself where
// available and from the equation of motion above it.
class DerivativeSource {
public:
    explicit DerivativeSource(const EquationOfMotion& eom, Parameters parameters = {})
        : chain_(eom, std::move(parameters))
    {
    }

    std::vector<double> at(const PhaseState& state, int max_order)
    {
        const int dim = static_cast<int>(state.y.size());
        if (dim < chain_.eom_order())
            throw std::invalid_argument("phase state has " + std::to_string(dim) +
                                        " components; the equation of motion needs " +
                                        std::to_string(chain_.eom_order()));
        return chain_.evaluate(state, max_order);
    }

private:
    DerivativeChain chain_;
};

class QuantumPotential {
public:
    QuantumPotential(const Lagrangian& bound, int n_terms)
    {
        if (n_terms < 1) throw std::invalid_argument("quantum potential needs at least one term");
        max_order_ = n_terms + 1;
        for (int a = 0; a < n_terms; ++a) {
            momenta_.push_back(partial(bound.body(), 2 * a + 1));
            max_order_ = std::max(max_order_, needed_order(momenta_.back()));
        }
    }

    int max_order() const noexcept { return max_order_; }

    double operator()(double t, std::span<const double> derivs) const
    {
        double q = 0.0;
        for (std::size_t a = 0; a < momenta_.size(); ++a) q += evaluate(momenta_[a], t, derivs) * derivs[a + 2];
        return q;
    }

private:
    std::vector<Expr> momenta_;
    int max_order_ = 0;
};

void require_explicit(const EquationOfMotion& eom)
{
    if (!eom.explicit_rhs) throw std::invalid_argument("equation of motion has no explicit form");
}

}  // namespace

void TaylorModel::validate() const
{
    require_model(*this);
    if (!std::isfinite(t0)) throw std::invalid_argument("Taylor model expansion time is not finite");
    for (const double v : c)
        if (!std::isfinite(v)) throw std::invalid_argument("Taylor model coefficient is not finite");
}

double taylor_eval(const TaylorModel& model, double t)
{
    require_model(model);
    return taylor_tail(model.c, t - model.t0, 0, 0);
}

double newton_eval(const TaylorModel& model, double t)
{
    require_model(model);
    const double tau = t - model.t0;
    return model.c[0] + model.c[1] * tau + model.c[2] * tau * tau / 2.0;
}

double hidden_residual(const TaylorModel& model, double t)
{
    require_model(model);
    return taylor_tail(model.c, t - model.t0, 3, 0);
}

double taylor_velocity(const TaylorModel& model, double t)
{
    require_model(model);
    return taylor_tail(model.c, t - model.t0, 1, 1);
}

TaylorModel model_from_state(const EquationOfMotion& eom, const PhaseState& state, int order,
                             const Parameters& parameters)
{
    if (order < 2) throw std::invalid_argument("Taylor model order must be >= 2");
    TaylorModel model;
    model.t0 = state.t;
    model.c = state_derivatives(eom, state, order, parameters);
    return model;
}

double action_integral(const Lagrangian& lagrangian, const EquationOfMotion& eom, const Trajectory& trajectory,
                       int intervals)
{
    require_explicit(eom);
    if (intervals < 2 || intervals % 2 != 0)
        throw std::invalid_argument("Simpson quadrature needs an even number of intervals");
    if (trajectory.samples.empty()) throw std::invalid_argument("trajectory is empty");
    if (static_cast<int>(trajectory.dimension()) < eom.order)
        throw std::invalid_argument("trajectory has " + std::to_string(trajectory.dimension()) +
                                    " components; the equation of motion needs " + std::to_string(eom.order));

    const Lagrangian bound = lagrangian.bound();
    const double t0 = trajectory.samples.front().t;
    const double t1 = trajectory.samples.back().t;
    if (t1 == t0) return 0.0;

    const OdeSystem system = to_first_order(eom);
    const auto grid = uniform_grid(t0, t1, intervals + 1);
    const auto states = resample(system, trajectory, grid);
    DerivativeSource source(eom);
    const int top = std::max(needed_order(bound.body()), eom.order - 1);

    double weighted = 0.0;
    for (std::size_t i = 0; i < states.size(); ++i) {
        const auto derivs = source.at(states[i], top);
        const double f = evaluate(bound.body(), states[i].t, derivs, bound.parameters());
        const double w = (i == 0 || i + 1 == states.size()) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        weighted += w * f;
    }
    return (t1 - t0) * (weighted / (3.0 * intervals));
}

ActionGap action_gap(double s, double s_newton, double h)
{
    if (!(h > 0.0)) throw std::invalid_argument("action quantum h must be positive");
    ActionGap gap;
    gap.delta_s = s - s_newton;
    gap.n = gap.delta_s / h;
    return gap;
}

UncertaintyPair uncertainty_terms(double r, double rdot, double r_newton, double rdot_newton, double m)
{
    if (!(m > 0.0)) throw std::invalid_argument("mass must be positive");
    return {m * (r * rdot - r_newton * rdot_newton), m * (r - r_newton) * (rdot - rdot_newton)};
}

UncertaintyPair uncertainty_pair(const TaylorModel& full, double m, double t)
{
    const double tau = t - full.t0;
    return uncertainty_terms(taylor_eval(full, t), taylor_velocity(full, t), newton_eval(full, t),
                             full.c[1] + full.c[2] * tau, m);
}

double quantum_potential(const Lagrangian& lagrangian, const EquationOfMotion& eom, const PhaseState& state,
                         int n_terms)
{
    const Lagrangian bound = lagrangian.bound();
    const QuantumPotential q(bound, n_terms);
    DerivativeSource source(eom);
    const auto derivs = source.at(state, std::max(q.max_order(), eom.order - 1));
    return q(state.t, derivs);
}

EnergyTerms energy_decomposition(const EnergyCoefficients& coeffs, std::span<const double> derivs)
{
    const auto& a = coeffs.alphas;
    if (a.size() < 2) throw std::invalid_argument("energy decomposition needs at least alpha_1 and alpha_2");
    if (derivs.size() < a.size())
        throw std::invalid_argument("energy decomposition needs derivatives up to order " +
                                    std::to_string(a.size() - 1));
    EnergyTerms out;
    out.v = a[0] * derivs[0] * derivs[0];
    out.w = a[1] * derivs[1] * derivs[1];
    for (std::size_t k = 2; k < a.size(); ++k) out.q += a[k] * derivs[k] * derivs[k];
    out.e = out.v + out.w + out.q;
    return out;
}

ComparisonReport compare(const Lagrangian& full, const Lagrangian& newton, const PhaseState& init_full,
                         const PhaseState& init_newton, double t_end, const IntegratorConfig& config, double h,
                         double m, const CompareOptions& options)
{
    if (!(h > 0.0)) throw std::invalid_argument("action quantum h must be positive");
    if (!(m > 0.0)) throw std::invalid_argument("mass must be positive");
    if (options.report_samples < 2) throw std::invalid_argument("report needs at least 2 samples");
    if (init_full.t != init_newton.t) throw std::invalid_argument("initial states must share t0");
    if (!(t_end > init_full.t)) throw std::invalid_argument("t_end must exceed t0");

    const Lagrangian lf = full.bound();
    const Lagrangian ln = newton.bound();

    ComparisonReport report;
    report.h = h;
    report.m = m;
    report.full_eom = solve_explicit(euler_lagrange(lf));
    report.newton_eom = solve_explicit(euler_lagrange(ln));

    const auto check_dim = [](const PhaseState& s, const EquationOfMotion& eom, const char* which) {
        if (static_cast<int>(s.y.size()) != eom.order)
            throw std::invalid_argument(std::string(which) + " initial state has " + std::to_string(s.y.size()) +
                                        " entries; the equation of motion needs " + std::to_string(eom.order));
    };
    check_dim(init_full, report.full_eom, "full");
    check_dim(init_newton, report.newton_eom, "Newtonian");

    const OdeSystem full_system = to_first_order(report.full_eom);
    const OdeSystem newton_system = to_first_order(report.newton_eom);
    report.full = integrate(full_system, init_full, t_end, config);
    report.newton = integrate(newton_system, init_newton, t_end, config);

    report.s = action_integral(lf, report.full_eom, report.full, options.quadrature_intervals);
    report.s_newton = action_integral(ln, report.newton_eom, report.newton, options.quadrature_intervals);
    const ActionGap gap = action_gap(report.s, report.s_newton, h);
    report.delta_s = gap.delta_s;
    report.n = gap.n;

    report.model = model_from_state(report.full_eom, init_full, std::max(2, options.taylor_order));

    const int q_terms = options.q_terms > 0 ? options.q_terms : (lf.order() + 1) / 2;
    const QuantumPotential qp(lf, q_terms);
    int top = std::max(qp.max_order(), report.full_eom.order - 1);
    if (options.alphas) top = std::max(top, static_cast<int>(options.alphas->alphas.size()) - 1);

    const auto grid = uniform_grid(init_full.t, t_end, options.report_samples);
    const auto full_states = resample(full_system, report.full, grid);
    const auto newton_states = resample(newton_system, report.newton, grid);
    DerivativeSource source(report.full_eom);

    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double t = grid[i];
        const auto& sf = full_states[i];
        const auto& sn = newton_states[i];
        const auto derivs = source.at(sf, top);
        report.q_r.push_back({t, hidden_residual(report.model, t), sf.y[0] - sn.y[0]});
        const UncertaintyPair u = uncertainty_terms(sf.y[0], sf.y[1], sn.y[0], sn.y[1], m);
        report.uncertainty.push_back({t, u.lhs, u.rhs});
        report.q.push_back({t, qp(t, derivs)});
        if (options.alphas) {
            const EnergyTerms e = energy_decomposition(*options.alphas, derivs);
            report.energy.push_back({t, e.v, e.w, e.q, e.e});
        }
    }
    return report;
}

std::vector<SeriesTable> report_series(const ComparisonReport& report)
{
    std::vector<SeriesTable> out;
    SeriesTable qr{"q_r", {"t", "q_r_taylor", "q_r_trajectory"}, {}};
    for (const auto& r : report.q_r) qr.rows.push_back({r.t, r.taylor, r.trajectory});
    out.push_back(std::move(qr));

    SeriesTable unc{"uncertainty", {"t", "lhs", "rhs"}, {}};
    for (const auto& r : report.uncertainty) unc.rows.push_back({r.t, r.lhs, r.rhs});
    out.push_back(std::move(unc));

    SeriesTable q{"quantum_potential", {"t", "q"}, {}};
    for (const auto& r : report.q) q.rows.push_back({r.t, r.q});
    out.push_back(std::move(q));

    if (!report.energy.empty()) {
        SeriesTable e{"energy", {"t", "v", "w", "q_energy", "e"}, {}};
        for (const auto& r : report.energy) e.rows.push_back({r.t, r.v, r.w, r.q, r.e});
        out.push_back(std::move(e));
    }
    return out;
}

void write_series_csv(std::ostream& out, const SeriesTable& table)
{
    for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << table.columns[i];
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_number(row[i]);
        out << '\n';
    }
}

}  // namespace ostro
