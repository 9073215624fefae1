#pragma once

#include "ostro/expr.hpp"
#include "ostro/variational.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ostro {

/// Phase point of an order-2N equation: y[k] = x^(k)(t), k = 0..2N-1.
struct PhaseState {
    double t = 0.0;
    std::vector<double> y;
};

struct IntegrationStats {
    std::int64_t accepted = 0;
    std::int64_t rejected = 0;
    /// Largest scaled error norm over accepted rk45 steps (<= 1 when the
    /// tolerance was honoured everywhere).
    double max_error_norm = 0.0;
};

struct Trajectory {
    int eom_order = 0;
    std::vector<PhaseState> samples;
    IntegrationStats stats;

    std::size_t dimension() const { return samples.empty() ? 0 : samples.front().y.size(); }
};

enum class Method { rk4, rk45 };

std::string_view method_name(Method m);
Method method_from_name(std::string_view name);

struct IntegratorConfig {
    Method method = Method::rk45;
    double step = 1e-2;     ///< rk4 step; unused by rk45
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    std::int64_t max_steps = 10'000'000;

    void validate() const;
};

/// First-order form y' = f(t, y) of an explicit equation of motion.
class OdeSystem {
public:
    OdeSystem(Expr explicit_rhs, int dimension, Parameters parameters = {});

    int dimension() const noexcept { return dimension_; }
    const Expr& rhs() const noexcept { return rhs_; }
    const Parameters& parameters() const noexcept { return parameters_; }

    /// dydt[k] = y[k+1] for k < dim-1, dydt[dim-1] = g(t, y).
    void operator()(double t, std::span<const double> y, std::span<double> dydt) const;
    std::vector<double> derivative(double t, std::span<const double> y) const;

private:
    Expr rhs_;
    int dimension_;
    Parameters parameters_;
};

OdeSystem to_first_order(const EquationOfMotion& eom, const Parameters& parameters = {});

class IntegrationError : public std::runtime_error {
public:
    enum class Kind { step_underflow, non_finite, max_steps };

    IntegrationError(Kind kind, double time, std::string message, Trajectory partial);

    Kind kind() const noexcept { return kind_; }
    /// Time of the last good state (the divergence time for non_finite).
    double time() const noexcept { return time_; }
    const Trajectory& partial() const noexcept { return partial_; }

private:
    Kind kind_;
    double time_;
    Trajectory partial_;
};

/// Integrates from init.t to t_end. Fixed-step classic RK4 or the
/// Dormand-Prince 5(4) pair with PI step control. The returned samples are
/// every accepted step, both endpoints included.
Trajectory integrate(const OdeSystem& system, const PhaseState& init, double t_end,
                     const IntegratorConfig& config);

/// Cubic Hermite interpolation of every component between accepted steps.
PhaseState interpolate(const OdeSystem& system, const Trajectory& trajectory, double t);

/// Interpolates at each of `times` (ascending, inside the trajectory span).
std::vector<PhaseState> resample(const OdeSystem& system, const Trajectory& trajectory,
                                 std::span<const double> times);

/// `count` equally spaced points covering [t0, t1] inclusive.
std::vector<double> uniform_grid(double t0, double t1, int count);

/// Symbolic chain of x^(2N+j) expressed through the phase coordinates,
/// built lazily and cached.
class DerivativeChain {
public:
    explicit DerivativeChain(const EquationOfMotion& eom, Parameters parameters = {});

    int eom_order() const noexcept { return order_; }

    /// Expression for x^(k), k >= 2N, in terms of t and x..x^(2N-1).
    const Expr& closed_form(int k);

    /// c[k] = x^(k)(s.t) for k = 0..max_order.
    std::vector<double> evaluate(const PhaseState& state, int max_order);

private:
    int order_;
    Parameters parameters_;
    std::vector<Expr> chain_;  // chain_[j] is x^(2N+j)
};

/// One-shot form of DerivativeChain::evaluate.
std::vector<double> state_derivatives(const EquationOfMotion& eom, const PhaseState& state,
                                      int max_order, const Parameters& parameters = {});

/// CSV with header "t,x0,...,x{2N-1}", shortest round-trip decimals.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);
Trajectory read_trajectory_csv(std::istream& in);

}  // namespace ostro
