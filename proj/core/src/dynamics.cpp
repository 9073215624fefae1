#include "ostro/dynamics.hpp"

#include "ostro/parse.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace ostro {

std::string_view method_name(Method m) { return m == Method::rk4 ? "rk4" : "rk45"; }

Method method_from_name(std::string_view name)
{
    if (name == "rk4") return Method::rk4;
    if (name == "rk45") return Method::rk45;
    throw std::invalid_argument("unknown integration method '" + std::string(name) + "' (rk4, rk45)");
}

void IntegratorConfig::validate() const
{
    if (!(step > 0.0) || !std::isfinite(step)) throw std::invalid_argument("integrator step must be > 0");
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
        throw std::invalid_argument("integrator tolerances must be > 0");
    if (max_steps <= 0) throw std::invalid_argument("max_steps must be > 0");
}

OdeSystem::OdeSystem(Expr explicit_rhs, int dimension, Parameters parameters)
    : rhs_(bind_parameters(explicit_rhs, parameters)), dimension_(dimension),
      parameters_(std::move(parameters))
{
    if (dimension_ < 1) throw std::invalid_argument("ODE dimension must be >= 1");
    if (const auto k = max_coord_order(rhs_); k && *k >= dimension_)
        throw std::invalid_argument("explicit right-hand side references d(x," + std::to_string(*k) +
                                    ") outside the phase state");
}

void OdeSystem::operator()(double t, std::span<const double> y, std::span<double> dydt) const
{
    const auto n = static_cast<std::size_t>(dimension_);
    for (std::size_t k = 0; k + 1 < n; ++k) dydt[k] = y[k + 1];
    dydt[n - 1] = ostro::evaluate(rhs_, t, y, parameters_);
}

std::vector<double> OdeSystem::derivative(double t, std::span<const double> y) const
{
    std::vector<double> out(static_cast<std::size_t>(dimension_));
    (*this)(t, y, out);
    return out;
}

OdeSystem to_first_order(const EquationOfMotion& eom, const Parameters& parameters)
{
    if (!eom.explicit_rhs)
        throw std::invalid_argument("equation of motion has no explicit form; call solve_explicit first");
    return OdeSystem(*eom.explicit_rhs, eom.order, parameters);
}

IntegrationError::IntegrationError(Kind kind, double time, std::string message, Trajectory partial)
    : std::runtime_error(std::move(message)), kind_(kind), time_(time), partial_(std::move(partial))
{
}

namespace {

using Vec = std::vector<double>;

bool all_finite(std::span<const double> v)
{
    return std::all_of(v.begin(), v.end(), [](double a) { return std::isfinite(a); });
}

// Evaluates f; false when the right-hand side is not finite.
bool try_rhs(const OdeSystem& sys, double t, std::span<const double> y, std::span<double> out)
{
    if (!all_finite(y)) return false;
    try {
        sys(t, y, out);
    } catch (const NonFiniteError&) {
        return false;
    }
    return all_finite(out);
}

[[noreturn]] void fail(IntegrationError::Kind kind, double t, const std::string& what, Trajectory traj)
{
    std::ostringstream msg;
    msg << what << " at t = " << format_number(t);
    throw IntegrationError(kind, t, msg.str(), std::move(traj));
}

Trajectory integrate_rk4(const OdeSystem& sys, const PhaseState& init, double t_end,
                         const IntegratorConfig& cfg)
{
    const std::size_t n = init.y.size();
    const double span = t_end - init.t;
    const auto steps = static_cast<std::int64_t>(std::ceil(span / cfg.step - 1e-9));
    if (steps > cfg.max_steps) {
        Trajectory traj{sys.dimension(), {init}, {}};
        fail(IntegrationError::Kind::max_steps, init.t,
             "rk4 needs " + std::to_string(steps) + " steps, above max_steps", std::move(traj));
    }

    Trajectory traj;
    traj.eom_order = sys.dimension();
    traj.samples.reserve(static_cast<std::size_t>(steps) + 1);
    traj.samples.push_back(init);

    Vec y = init.y;
    Vec k1(n), k2(n), k3(n), k4(n), tmp(n);
    double t = init.t;
    for (std::int64_t i = 1; i <= steps; ++i) {
        const double t_next = i == steps ? t_end : init.t + static_cast<double>(i) * cfg.step;
        const double h = t_next - t;
        bool ok = try_rhs(sys, t, y, k1);
        for (std::size_t j = 0; ok && j < n; ++j) tmp[j] = y[j] + 0.5 * h * k1[j];
        ok = ok && try_rhs(sys, t + 0.5 * h, tmp, k2);
        for (std::size_t j = 0; ok && j < n; ++j) tmp[j] = y[j] + 0.5 * h * k2[j];
        ok = ok && try_rhs(sys, t + 0.5 * h, tmp, k3);
        for (std::size_t j = 0; ok && j < n; ++j) tmp[j] = y[j] + h * k3[j];
        ok = ok && try_rhs(sys, t + h, tmp, k4);
        if (ok) {
            for (std::size_t j = 0; j < n; ++j) tmp[j] = y[j] + h / 6.0 * (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j]);
            ok = all_finite(tmp);
        }
        if (!ok) fail(IntegrationError::Kind::non_finite, t, "solution diverged", std::move(traj));
        y = tmp;
        t = t_next;
        traj.samples.push_back({t, y});
        ++traj.stats.accepted;
    }
    return traj;
}

// Dormand-Prince 5(4) tableau.
constexpr std::array<double, 7> kC{0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
// Fifth-order weights minus embedded fourth-order weights.
constexpr std::array<double, 7> kE{71.0 / 57600,      0.0,          -71.0 / 16695, 71.0 / 1920,
                                   -17253.0 / 339200, 22.0 / 525, -1.0 / 40};

double scaled_norm(std::span<const double> v, std::span<const double> y0, std::span<const double> y1,
                   const IntegratorConfig& cfg)
{
    double acc = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        acc += (v[i] / sc) * (v[i] / sc);
    }
    return std::sqrt(acc / static_cast<double>(v.size()));
}

double initial_step(const OdeSystem& sys, double t0, const Vec& y0, const Vec& f0, double span,
                    const IntegratorConfig& cfg)
{
    const Vec zero(y0.size(), 0.0);
    const double d0 = scaled_norm(y0, y0, zero, cfg);
    const double d1 = scaled_norm(f0, y0, zero, cfg);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, span);
    Vec y1(y0.size());
    Vec f1(y0.size());
    for (std::size_t i = 0; i < y0.size(); ++i) y1[i] = y0[i] + h0 * f0[i];
    double d2 = 0.0;
    if (try_rhs(sys, t0 + h0, y1, f1)) {
        Vec diff(y0.size());
        for (std::size_t i = 0; i < y0.size(); ++i) diff[i] = f1[i] - f0[i];
        d2 = scaled_norm(diff, y0, zero, cfg) / h0;
    }
    const double dmax = std::max(d1, d2);
    const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 1.0 / 5.0);
    return std::min({100.0 * h0, h1, span});
}

Trajectory integrate_rk45(const OdeSystem& sys, const PhaseState& init, double t_end,
                          const IntegratorConfig& cfg)
{
    constexpr double kSafety = 0.9;
    constexpr double kAlpha = 0.7 / 5.0;
    constexpr double kBeta = 0.4 / 5.0;
    constexpr double kMinFactor = 0.2;
    constexpr double kMaxFactor = 5.0;

    const std::size_t n = init.y.size();
    const double span = t_end - init.t;
    const double h_min = 1e-14 * span;

    Trajectory traj;
    traj.eom_order = sys.dimension();
    traj.samples.push_back(init);

    Vec y = init.y;
    std::array<Vec, 7> k;
    for (auto& ki : k) ki.assign(n, 0.0);
    Vec tmp(n), y_new(n), err(n);
    double t = init.t;
    if (!try_rhs(sys, t, y, k[0]))
        fail(IntegrationError::Kind::non_finite, t, "right-hand side not finite at the initial state",
             std::move(traj));

    double h = initial_step(sys, t, y, k[0], span, cfg);
    double prev_err = 1e-4;
    bool last_rejected = false;
    std::int64_t attempts = 0;

    while (t < t_end) {
        if (++attempts > cfg.max_steps)
            fail(IntegrationError::Kind::max_steps, t, "max_steps exceeded", std::move(traj));
        if (t + h >= t_end || t + 1.01 * h >= t_end) h = t_end - t;
        if (h < h_min) fail(IntegrationError::Kind::step_underflow, t, "step size underflow", std::move(traj));

        bool finite = true;
        for (std::size_t s = 1; s < 7 && finite; ++s) {
            for (std::size_t i = 0; i < n; ++i) {
                double acc = y[i];
                for (std::size_t j = 0; j < s; ++j) acc += h * kA[s][j] * k[j][i];
                tmp[i] = acc;
            }
            finite = try_rhs(sys, t + kC[s] * h, tmp, k[s]);
        }
        double err_norm = std::numeric_limits<double>::infinity();
        if (finite) {
            y_new = tmp;  // stage 7 is evaluated at the fifth-order solution
            for (std::size_t i = 0; i < n; ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j < 7; ++j) acc += kE[j] * k[j][i];
                err[i] = h * acc;
            }
            err_norm = scaled_norm(err, y, y_new, cfg);
        }

        if (!finite || !std::isfinite(err_norm)) {
            // Shrink until the trial is finite; if that is impossible the
            // solution itself has blown up.
            if (0.2 * h < h_min) fail(IntegrationError::Kind::non_finite, t, "solution diverged", std::move(traj));
            h *= 0.2;
            last_rejected = true;
            ++traj.stats.rejected;
            continue;
        }

        if (err_norm <= 1.0) {
            t = (h == t_end - t) ? t_end : t + h;
            y = y_new;
            k[0] = k[6];
            traj.samples.push_back({t, y});
            ++traj.stats.accepted;
            traj.stats.max_error_norm = std::max(traj.stats.max_error_norm, err_norm);
            double factor = err_norm == 0.0
                                ? kMaxFactor
                                : kSafety * std::pow(err_norm, -kAlpha) * std::pow(prev_err, kBeta);
            factor = std::clamp(factor, kMinFactor, last_rejected ? 1.0 : kMaxFactor);
            prev_err = std::max(err_norm, 1e-4);
            h *= factor;
            last_rejected = false;
        } else {
            const double factor = std::max(kMinFactor, kSafety * std::pow(err_norm, -1.0 / 5.0));
            h *= factor;
            last_rejected = true;
            ++traj.stats.rejected;
        }
    }
    return traj;
}

}  // namespace

Trajectory integrate(const OdeSystem& system, const PhaseState& init, double t_end,
                     const IntegratorConfig& config)
{
    config.validate();
    if (static_cast<int>(init.y.size()) != system.dimension())
        throw std::invalid_argument("initial state has " + std::to_string(init.y.size()) +
                                    " components, the system needs " + std::to_string(system.dimension()));
    if (!(t_end > init.t)) throw std::invalid_argument("t_end must be greater than the initial time");
    if (!all_finite(init.y)) throw std::invalid_argument("initial state must be finite");
    return config.method == Method::rk4 ? integrate_rk4(system, init, t_end, config)
                                        : integrate_rk45(system, init, t_end, config);
}

namespace {

void hermite(double t, const PhaseState& a, std::span<const double> fa, const PhaseState& b,
             std::span<const double> fb, std::vector<double>& out)
{
    const double h = b.t - a.t;
    const double s = (t - a.t) / h;
    const double s2 = s * s;
    const double s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1;
    const double h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2;
    const double h11 = s3 - s2;
    out.resize(a.y.size());
    for (std::size_t i = 0; i < a.y.size(); ++i)
        out[i] = h00 * a.y[i] + h10 * h * fa[i] + h01 * b.y[i] + h11 * h * fb[i];
}

void check_inside(const Trajectory& traj, double t)
{
    if (traj.samples.empty()) throw std::invalid_argument("empty trajectory");
    const double lo = traj.samples.front().t;
    const double hi = traj.samples.back().t;
    const double slack = 1e-12 * std::max(1.0, std::abs(hi - lo));
    if (t < lo - slack || t > hi + slack)
        throw std::out_of_range("time " + format_number(t) + " outside trajectory span [" + format_number(lo) +
                                ", " + format_number(hi) + "]");
}

}  // namespace

PhaseState interpolate(const OdeSystem& system, const Trajectory& trajectory, double t)
{
    const double times[] = {t};
    return resample(system, trajectory, times).front();
}

std::vector<PhaseState> resample(const OdeSystem& system, const Trajectory& trajectory,
                                 std::span<const double> times)
{
    std::vector<PhaseState> out;
    out.reserve(times.size());
    const auto& s = trajectory.samples;
    std::size_t cached = static_cast<std::size_t>(-1);
    std::vector<double> fa, fb;
    for (const double t : times) {
        check_inside(trajectory, t);
        if (s.size() == 1) {
            out.push_back({t, s.front().y});
            continue;
        }
        const auto upper =
            std::upper_bound(s.begin(), s.end(), t, [](double v, const PhaseState& p) { return v < p.t; });
        const auto idx = static_cast<std::size_t>(upper - s.begin());
        const std::size_t seg = std::min(idx == 0 ? 0 : idx - 1, s.size() - 2);
        const auto& a = s[seg];
        const auto& b = s[seg + 1];
        if (t <= a.t) {
            out.push_back({t, a.y});
            continue;
        }
        if (t >= b.t) {
            out.push_back({t, b.y});
            continue;
        }
        if (cached != seg) {
            fa = system.derivative(a.t, a.y);
            fb = system.derivative(b.t, b.y);
            cached = seg;
        }
        PhaseState p;
        p.t = t;
        hermite(t, a, fa, b, fb, p.y);
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<double> uniform_grid(double t0, double t1, int count)
{
    if (count < 2) throw std::invalid_argument("grid needs at least two points");
    std::vector<double> out(static_cast<std::size_t>(count));
    const double dt = (t1 - t0) / (count - 1);
    for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = t0 + dt * i;
    out.back() = t1;
    return out;
}

DerivativeChain::DerivativeChain(const EquationOfMotion& eom, Parameters parameters)
    : order_(eom.order), parameters_(std::move(parameters))
{
    if (!eom.explicit_rhs)
        throw std::invalid_argument("equation of motion has no explicit form; call solve_explicit first");
    chain_.push_back(bind_parameters(*eom.explicit_rhs, parameters_));
}

const Expr& DerivativeChain::closed_form(int k)
{
    if (k < order_) throw std::invalid_argument("closed_form needs k >= 2N");
    const auto j = static_cast<std::size_t>(k - order_);
    while (chain_.size() <= j)
        chain_.push_back(substitute(total_time_derivative(chain_.back()), order_, chain_.front()));
    return chain_[j];
}

std::vector<double> DerivativeChain::evaluate(const PhaseState& state, int max_order)
{
    if (static_cast<int>(state.y.size()) < order_)
        throw std::invalid_argument("phase state has " + std::to_string(state.y.size()) +
                                    " components; the equation of motion needs " + std::to_string(order_));
    std::vector<double> c(state.y.begin(), state.y.begin() + std::min(order_, max_order + 1));
    for (int k = order_; k <= max_order; ++k)
        c.push_back(ostro::evaluate(closed_form(k), state.t, std::span<const double>(state.y).first(order_),
                                    parameters_));
    return c;
}

std::vector<double> state_derivatives(const EquationOfMotion& eom, const PhaseState& state, int max_order,
                                      const Parameters& parameters)
{
    DerivativeChain chain(eom, parameters);
    return chain.evaluate(state, max_order);
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory)
{
    const std::size_t dim = trajectory.dimension();
    out << "t";
    for (std::size_t k = 0; k < dim; ++k) out << ",x" << k;
    out << '\n';
    for (const auto& s : trajectory.samples) {
        out << format_number(s.t);
        for (const double v : s.y) out << ',' << format_number(v);
        out << '\n';
    }
}

Trajectory read_trajectory_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("trajectory CSV is empty");
    const auto split = [](const std::string& s) {
        std::vector<std::string> cells;
        std::stringstream ss(s);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        return cells;
    };
    const auto header = split(line);
    if (header.size() < 2 || header.front() != "t") throw std::runtime_error("trajectory CSV header must start with t");
    for (std::size_t k = 1; k < header.size(); ++k) {
        if (header[k] != "x" + std::to_string(k - 1))
            throw std::runtime_error("unexpected trajectory CSV column '" + header[k] + "'");
    }
    Trajectory traj;
    traj.eom_order = static_cast<int>(header.size() - 1);
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != header.size())
            throw std::runtime_error("trajectory CSV row " + std::to_string(row) + " has the wrong width");
        const auto number = [&](const std::string& cell) {
            double v = 0.0;
            const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc{} || end != cell.data() + cell.size())
                throw std::runtime_error("trajectory CSV row " + std::to_string(row) + ": bad number '" + cell + "'");
            return v;
        };
        PhaseState s;
        s.t = number(cells[0]);
        for (std::size_t k = 1; k < cells.size(); ++k) s.y.push_back(number(cells[k]));
        if (!traj.samples.empty() && !(s.t > traj.samples.back().t))
            throw std::runtime_error("trajectory CSV times must increase strictly");
        traj.samples.push_back(std::move(s));
    }
    return traj;
}

}  // namespace ostro
