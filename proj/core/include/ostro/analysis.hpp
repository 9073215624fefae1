#pragma once

#include "ostro/dynamics.hpp"
#include "ostro/variational.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ostro {

/// Derivative coefficients c[k] = x^(k)(t0), k = 0..M.
struct TaylorModel {
    double t0 = 0.0;
    std::vector<double> c;

    int order() const noexcept { return static_cast<int>(c.size()) - 1; }
    /// Throws std::invalid_argument unless M >= 2 and every entry is finite.
    void validate() const;
};

/// sum_{k=0}^{M} c[k] (t - t0)^k / k!
double taylor_eval(const TaylorModel& model, double t);
/// c[0] + c[1] (t - t0) + c[2] (t - t0)^2 / 2
double newton_eval(const TaylorModel& model, double t);
/// sum_{k=3}^{M} c[k] (t - t0)^k / k!
double hidden_residual(const TaylorModel& model, double t);
/// sum_{k=1}^{M} c[k] (t - t0)^(k-1) / (k-1)!
double taylor_velocity(const TaylorModel& model, double t);

TaylorModel model_from_state(const EquationOfMotion& eom, const PhaseState& state, int order,
                             const Parameters& parameters = {});

inline constexpr int default_quadrature_intervals = 1024;

/// Composite Simpson integral of the bound Lagrangian along `trajectory`,
/// resampled on `intervals` (even) uniform sub-intervals. Derivatives beyond
/// the phase state come from the equation of motion.
double action_integral(const Lagrangian& lagrangian, const EquationOfMotion& eom, const Trajectory& trajectory,
                       int intervals = default_quadrature_intervals);

struct ActionGap {
    double delta_s = 0.0;
    double n = 0.0;
};

ActionGap action_gap(double s, double s_newton, double h);

struct UncertaintyPair {
    double lhs = 0.0;  ///< m (r rdot - rN rNdot)
    double rhs = 0.0;  ///< m (r - rN)(rdot - rNdot)
};

UncertaintyPair uncertainty_terms(double r, double rdot, double r_newton, double rdot_newton, double m);
UncertaintyPair uncertainty_pair(const TaylorModel& full, double m, double t);

/// sum_{a=0}^{n_terms-1} dL/dx^(2a+1) * x^(a+2) at `state`.
double quantum_potential(const Lagrangian& lagrangian, const EquationOfMotion& eom, const PhaseState& state,
                         int n_terms);

struct EnergyCoefficients {
    std::vector<double> alphas;  ///< alpha_1 .. alpha_M
};

struct EnergyTerms {
    double v = 0.0;
    double w = 0.0;
    double q = 0.0;
    double e = 0.0;
};

/// V = a1 x^2, W = a2 x'^2, Q = sum_{k>=3} a_k (x^(k-1))^2, E = V + W + Q.
EnergyTerms energy_decomposition(const EnergyCoefficients& coeffs, std::span<const double> derivs);

struct CompareOptions {
    int report_samples = 256;
    int taylor_order = 8;
    int quadrature_intervals = default_quadrature_intervals;
    /// Terms of the quantum potential; 0 selects ceil(N/2) of the full Lagrangian.
    int q_terms = 0;
    std::optional<EnergyCoefficients> alphas;
};

struct ComparisonReport {
    struct QrRow {
        double t, taylor, trajectory;
    };
    struct UncertaintyRow {
        double t, lhs, rhs;
    };
    struct QRow {
        double t, q;
    };
    struct EnergyRow {
        double t, v, w, q, e;
    };

    double s = 0.0;
    double s_newton = 0.0;
    double delta_s = 0.0;
    double n = 0.0;
    double h = 1.0;
    double m = 1.0;

    EquationOfMotion full_eom;
    EquationOfMotion newton_eom;
    Trajectory full;
    Trajectory newton;
    TaylorModel model;

    std::vector<QrRow> q_r;
    std::vector<UncertaintyRow> uncertainty;
    std::vector<QRow> q;
    std::vector<EnergyRow> energy;
};

/// Integrates both systems from their initial states to t_end and assembles
/// every diagnostic on a uniform report grid.
ComparisonReport compare(const Lagrangian& full, const Lagrangian& newton, const PhaseState& init_full,
                         const PhaseState& init_newton, double t_end, const IntegratorConfig& config, double h,
                         double m, const CompareOptions& options = {});

struct SeriesTable {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

/// q_r, uncertainty, quantum_potential and (when present) energy tables.
std::vector<SeriesTable> report_series(const ComparisonReport& report);

void write_series_csv(std::ostream& out, const SeriesTable& table);

}  // namespace ostro
