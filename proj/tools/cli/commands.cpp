#include "cli/commands.hpp"

#include "ostro/parse.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#ifndef OSTRO_VERSION
#define OSTRO_VERSION "0.0.0"
#endif

namespace ostro::cli {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace fs = std::filesystem;

void write_file(const fs::path& path, const std::string& content)
{
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
    spdlog::info("wrote {}", path.string());
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

void require_bound(const Lagrangian& bound, const char* field)
{
    const auto missing = parameter_names(bound.body());
    if (!missing.empty())
        throw ConfigError("parameter '" + *missing.begin() + "' in field '" + field + "' has no value");
}

Lagrangian load_lagrangian(const std::string& text, const Parameters& parameters)
{
    return Lagrangian::parse(text, parameters);
}

std::vector<std::string> formatted(const std::vector<Expr>& exprs)
{
    std::vector<std::string> out;
    for (const auto& e : exprs) out.push_back(format(e));
    return out;
}

json equations_json(const Lagrangian& bound, const EquationOfMotion& eom)
{
    json doc;
    doc["lagrangian"] = format(bound.body());
    doc["lagrangian_order"] = bound.order();
    doc["order"] = eom.order;
    doc["residual"] = format(eom.residual);
    doc["explicit_rhs"] = eom.explicit_rhs ? json(format(*eom.explicit_rhs)) : json(nullptr);
    return doc;
}

json table_json(const SeriesTable& table)
{
    json rows = json::array();
    for (const auto& r : table.rows) rows.push_back(r);
    return {{"columns", table.columns}, {"rows", rows}};
}

std::string table_csv(const SeriesTable& table)
{
    std::ostringstream out;
    write_series_csv(out, table);
    return out.str();
}

std::string trajectory_csv(const Trajectory& traj)
{
    std::ostringstream out;
    write_trajectory_csv(out, traj);
    return out.str();
}

json stats_json(const IntegrationStats& s)
{
    return {{"accepted", s.accepted}, {"rejected", s.rejected}, {"max_error_norm", s.max_error_norm}};
}

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

PhaseState initial_state(const RunConfig& config, int order, const char* which)
{
    if (static_cast<int>(config.initial_state.size()) != order)
        throw ConfigError(std::string("field 'initial_state' has ") + std::to_string(config.initial_state.size()) +
                          " entries; the " + which + "equation of motion needs " + std::to_string(order));
    return {config.t0, config.initial_state};
}

IntegratorConfig integrator_for(const RunConfig& config) { return config.integrator; }

std::string gnuplot_simulate(int dimension)
{
    std::ostringstream gp;
    gp << "set datafile separator ','\nset key autotitle columnhead\nset xlabel 't'\n";
    gp << "plot";
    for (int k = 0; k < dimension; ++k) gp << (k ? "," : "") << " 'trajectory.csv' using 1:" << k + 2 << " with lines";
    gp << "\n";
    return gp.str();
}

std::string gnuplot_analyze(const std::vector<SeriesTable>& tables)
{
    std::ostringstream gp;
    gp << "set datafile separator ','\nset key autotitle columnhead\nset xlabel 't'\n";
    for (const auto& t : tables) {
        gp << "set title '" << t.name << "'\nplot";
        for (std::size_t c = 1; c < t.columns.size(); ++c)
            gp << (c > 1 ? "," : "") << " '" << t.name << ".csv' using 1:" << c + 1 << " with lines";
        gp << "\npause -1\n";
    }
    return gp.str();
}

std::string gnuplot_sweep()
{
    return "set datafile separator ','\nset key autotitle columnhead\nset logscale xy\n"
           "set xlabel 'param'\nset ylabel '|delta_s|'\nplot 'sweep.csv' using 1:(abs($2)) with linespoints\n";
}

}  // namespace

std::string_view version() noexcept { return OSTRO_VERSION; }

int cmd_derive(const RunConfig& config, const RunOptions& options, std::ostream& out)
{
    const auto start = Clock::now();
    const Lagrangian parsed = load_lagrangian(config.lagrangian, config.parameters);
    const Lagrangian l = options.symbolic ? Lagrangian(parsed.body()) : parsed.bound();
    const EquationOfMotion eom = solve_explicit(euler_lagrange(l));
    const MomentumSet ms = momentum_set(l);

    json doc = equations_json(l, eom);
    doc["version"] = std::string(version());
    doc["symbolic"] = options.symbolic;
    doc["parameters"] = json::object();
    if (!options.symbolic)
        for (const auto& [name, v] : config.parameters) doc["parameters"][name] = v;
    doc["F_alpha"] = formatted(ms.ladder_forces);
    doc["p_alpha"] = formatted(ms.ladder_momenta);
    doc["ostro_momenta"] = formatted(ms.ostro_momenta);
    doc["hamiltonian"] = format(ms.hamiltonian);

    std::vector<Expr> lhs = ms.ladder_forces;
    std::vector<Expr> rhs;
    for (std::size_t a = 0; a < ms.ladder_momenta.size(); ++a)
        rhs.push_back(time_derivative_n(ms.ladder_momenta[a], static_cast<int>(a) + 1));
    doc["force_balance"] = {{"lhs", format(Expr::sum(lhs))}, {"rhs", format(Expr::sum(rhs))}};
    if (options.timing) doc["duration_s"] = seconds_since(start);

    const std::string text = dump(doc);
    out << text;
    write_file(fs::path(config.out_dir) / "equations.json", text);
    return exit_ok;
}

int cmd_simulate(const RunConfig& config, const RunOptions& options)
{
    const auto start = Clock::now();
    const Lagrangian l = load_lagrangian(config.lagrangian, config.parameters).bound();
    require_bound(l, "lagrangian");
    const EquationOfMotion eom = solve_explicit(euler_lagrange(l));
    const PhaseState init = initial_state(config, eom.order, "");
    const OdeSystem system = to_first_order(eom);

    json summary;
    summary["version"] = std::string(version());
    summary["command"] = "simulate";
    summary["config"] = config_to_json(config);
    summary["equations"] = equations_json(l, eom);

    Trajectory traj;
    int code = exit_ok;
    try {
        traj = integrate(system, init, config.t_end, integrator_for(config));
        summary["status"] = "ok";
        summary["divergence_time"] = nullptr;
    } catch (const IntegrationError& e) {
        spdlog::error("{}", e.what());
        traj = e.partial();
        summary["status"] = "failed";
        summary["error"] = e.what();
        summary["divergence_time"] = e.time();
        code = exit_integration;
    }

    const Expr h = ostrogradski_hamiltonian(l);
    double h0 = 0.0;
    double drift = 0.0;
    bool h_finite = true;
    if (!traj.samples.empty()) {
        h0 = evaluate(h, traj.samples.front().t, traj.samples.front().y);
        for (const auto& s : traj.samples) {
            double v = 0.0;
            try {
                v = evaluate(h, s.t, s.y);
            } catch (const NonFiniteError&) {
                h_finite = false;
                break;
            }
            drift = std::max(drift, std::abs(v - h0));
        }
    }
    json hj;
    hj["expression"] = format(h);
    hj["initial"] = h0;
    hj["max_abs_drift"] = h_finite ? json(drift) : json(nullptr);
    hj["max_rel_drift"] = (h_finite && h0 != 0.0) ? json(drift / std::abs(h0)) : json(nullptr);
    hj["conserved_expected"] = l.time_independent();
    summary["hamiltonian"] = hj;
    if (!traj.samples.empty()) {
        const auto& last = traj.samples.back();
        summary["final_state"] = {{"t", last.t}, {"y", last.y}};
    }
    summary["steps"] = stats_json(traj.stats);
    if (options.timing) summary["duration_s"] = seconds_since(start);

    const fs::path dir(config.out_dir);
    write_file(dir / "trajectory.csv", trajectory_csv(traj));
    write_file(dir / "summary.json", dump(summary));
    if (options.emit_gnuplot) write_file(dir / "plot.gp", gnuplot_simulate(eom.order));
    return code;
}

ComparisonReport run_comparison(const RunConfig& config)
{
    if (!config.newtonian_lagrangian) throw ConfigError("missing field 'newtonian_lagrangian'");
    const Lagrangian full = load_lagrangian(config.lagrangian, config.parameters).bound();
    const Lagrangian newton = load_lagrangian(*config.newtonian_lagrangian, config.parameters).bound();
    require_bound(full, "lagrangian");
    require_bound(newton, "newtonian_lagrangian");

    const EquationOfMotion full_eom = solve_explicit(euler_lagrange(full));
    const EquationOfMotion newton_eom = solve_explicit(euler_lagrange(newton));
    const PhaseState init_full = initial_state(config, full_eom.order, "full ");
    if (config.initial_state.size() < static_cast<std::size_t>(newton_eom.order))
        throw ConfigError("field 'initial_state' is shorter than the Newtonian equation of motion");
    const PhaseState init_newton{config.t0, std::vector<double>(config.initial_state.begin(),
                                                                config.initial_state.begin() + newton_eom.order)};

    CompareOptions opts;
    opts.report_samples = config.report_samples;
    opts.taylor_order = config.taylor_order;
    opts.quadrature_intervals = config.quadrature_intervals;
    opts.q_terms = config.q_terms;
    if (config.alphas) opts.alphas = EnergyCoefficients{*config.alphas};
    return compare(full, newton, init_full, init_newton, config.t_end, integrator_for(config), config.h, config.mass,
                   opts);
}

int cmd_analyze(const RunConfig& config, const RunOptions& options)
{
    const auto start = Clock::now();
    const ComparisonReport report = run_comparison(config);
    const Lagrangian full = load_lagrangian(config.lagrangian, config.parameters).bound();
    const Lagrangian newton = load_lagrangian(*config.newtonian_lagrangian, config.parameters).bound();

    auto tables = report_series(report);
    {
        const auto grid = uniform_grid(config.t0, config.t_end, config.report_samples);
        Trajectory sampled;
        sampled.eom_order = report.full_eom.order;
        sampled.samples = resample(to_first_order(report.full_eom), report.full, grid);
        SeriesTable fb{"force_balance", {"t", "lhs", "rhs", "el_residual"}, {}};
        for (const auto& r : force_balance_eval(full, report.full_eom, sampled))
            fb.rows.push_back({r.t, r.lhs, r.rhs, r.el_residual});
        tables.push_back(std::move(fb));
    }

    json doc;
    doc["version"] = std::string(version());
    doc["command"] = "analyze";
    doc["config"] = config_to_json(config);
    doc["equations"] = {{"full", equations_json(full, report.full_eom)},
                        {"newtonian", equations_json(newton, report.newton_eom)}};
    doc["s"] = report.s;
    doc["s_newton"] = report.s_newton;
    doc["delta_s"] = report.delta_s;
    doc["n"] = report.n;
    doc["h"] = report.h;
    doc["m"] = report.m;
    doc["taylor_model"] = {{"t0", report.model.t0}, {"c", report.model.c}};
    doc["integration"] = {{"full", stats_json(report.full.stats)}, {"newtonian", stats_json(report.newton.stats)}};
    json series = json::object();
    for (const auto& t : tables) series[t.name] = table_json(t);
    doc["series"] = series;
    if (options.timing) doc["duration_s"] = seconds_since(start);

    const fs::path dir(config.out_dir);
    write_file(dir / "report.json", dump(doc));
    for (const auto& t : tables) write_file(dir / (t.name + ".csv"), table_csv(t));
    write_file(dir / "trajectory_full.csv", trajectory_csv(report.full));
    write_file(dir / "trajectory_newton.csv", trajectory_csv(report.newton));
    if (options.emit_gnuplot) write_file(dir / "plot.gp", gnuplot_analyze(tables));
    spdlog::info("delta_s = {} (n = {})", report.delta_s, report.n);
    return exit_ok;
}

int cmd_sweep(const RunConfig& config, const RunOptions& options)
{
    const auto start = Clock::now();
    if (!config.sweep || config.sweep->parameter.empty()) throw ConfigError("missing field 'sweep.parameter'");
    if (!config.newtonian_lagrangian) throw ConfigError("missing field 'newtonian_lagrangian'");
    const SweepSpec& spec = *config.sweep;
    if (spec.values.empty()) throw ConfigError("field 'sweep.values' is empty");

    const auto in_text = [&](const std::string& text) {
        const auto names = parameter_names(parse(text));
        return names.contains(spec.parameter);
    };
    if (!config.parameters.contains(spec.parameter) && !in_text(config.lagrangian) &&
        !in_text(*config.newtonian_lagrangian))
        throw ConfigError("unknown sweep parameter '" + spec.parameter + "'");

    struct Row {
        double value = 0.0;
        double delta_s = std::numeric_limits<double>::quiet_NaN();
        double n = std::numeric_limits<double>::quiet_NaN();
        int code = exit_ok;
        std::string error;
    };
    std::vector<Row> rows(spec.values.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < rows.size(); i = next++) {
            Row& row = rows[i];
            row.value = spec.values[i];
            RunConfig cfg = config;
            cfg.parameters[spec.parameter] = row.value;
            try {
                // A value that lowers the order keeps the leading state entries.
                const Lagrangian full = load_lagrangian(cfg.lagrangian, cfg.parameters).bound();
                const auto needed = static_cast<std::size_t>(2 * full.order());
                if (cfg.initial_state.size() > needed) cfg.initial_state.resize(needed);
                const ComparisonReport r = run_comparison(cfg);
                row.delta_s = r.delta_s;
                row.n = r.n;
            } catch (...) {
                row.code = exit_code_for(std::current_exception());
                try {
                    throw;
                } catch (const std::exception& e) {
                    row.error = e.what();
                }
                spdlog::warn("sweep {} = {} failed: {}", spec.parameter, row.value, row.error);
            }
        }
    };
    const int jobs = std::max(1, std::min<int>(options.jobs, static_cast<int>(rows.size())));
    std::vector<std::thread> pool;
    for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    std::vector<std::size_t> order(rows.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return rows[a].value < rows[b].value; });

    std::ostringstream csv;
    csv << "param,delta_s,n\n";
    json summary_rows = json::array();
    int code = exit_ok;
    std::size_t failed = 0;
    for (const auto i : order) {
        const Row& r = rows[i];
        csv << format_number(r.value) << ',' << format_number(r.delta_s) << ',' << format_number(r.n) << '\n';
        json jr = {{"value", r.value}, {"delta_s", r.delta_s}, {"n", r.n}, {"status", r.code == exit_ok ? "ok" : "failed"}};
        if (r.code != exit_ok) {
            jr["error"] = r.error;
            jr["exit_code"] = r.code;
            ++failed;
            if (code == exit_ok) code = r.code;
        }
        summary_rows.push_back(jr);
    }

    json summary;
    summary["version"] = std::string(version());
    summary["command"] = "sweep";
    summary["config"] = config_to_json(config);
    summary["parameter"] = spec.parameter;
    summary["rows"] = summary_rows;
    summary["failed_rows"] = failed;
    if (options.timing) summary["duration_s"] = seconds_since(start);

    const fs::path dir(config.out_dir);
    write_file(dir / "sweep.csv", csv.str());
    write_file(dir / "sweep_summary.json", dump(summary));
    if (options.emit_gnuplot) write_file(dir / "plot.gp", gnuplot_sweep());
    return code;
}

int exit_code_for(const std::exception_ptr& error) noexcept
{
    try {
        std::rethrow_exception(error);
    } catch (const DegenerateLagrangian&) {
        return exit_degenerate;
    } catch (const IntegrationError&) {
        return exit_integration;
    } catch (const NonFiniteError&) {
        return exit_integration;
    } catch (...) {
        return exit_config;
    }
}

namespace {

void configure_logging()
{
    auto logger = spdlog::stderr_logger_st("ostro");
    logger->set_pattern("ostro [%l] %v");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    if (const char* env = std::getenv("OSTRO_LOG")) {
        const auto level = spdlog::level::from_str(env);
        // from_str maps unknown names to off; keep the default instead.
        if (level != spdlog::level::off || std::string_view(env) == "off") spdlog::set_level(level);
    }
}

}  // namespace

int run(int argc, char** argv)
{
    if (!spdlog::get("ostro")) configure_logging();

    CLI::App app{"Higher-derivative Lagrangian mechanics toolkit", "ostro"};
    app.set_version_flag("--version", std::string(version()));
    app.set_help_flag("--help", "Print this help message and exit");
    app.require_subcommand(1);

    std::string config_path;
    Overrides overrides;
    RunOptions options;

    const auto add_common = [&](CLI::App* sub) {
        sub->set_help_flag("--help", "Print this help message and exit");
        sub->add_option("config", config_path, "JSON run configuration");
        sub->add_option("-L,--lagrangian", overrides.lagrangian, "Lagrangian text (overrides the config)");
        sub->add_option("--param", overrides.params, "Parameter assignment name=value (repeatable)");
        sub->add_option("--out-dir", overrides.out_dir, "Output directory");
        sub->add_flag("--timing", options.timing, "Record wall-clock duration in the output");
    };
    const auto add_numeric = [&](CLI::App* sub) {
        auto* h = sub->add_option("--h", overrides.h, "Action quantum h");
        sub->add_flag("--planck", overrides.planck, "Use the Planck constant for h")->excludes(h);
        sub->add_option("--mass", overrides.mass, "Particle mass m");
        sub->add_option("--t-end", overrides.t_end, "Final time");
        sub->add_option("--method", overrides.method, "Integrator (rk4 or rk45)");
        sub->add_option("--step", overrides.step, "Fixed rk4 step");
        sub->add_option("--tol", overrides.tol, "Relative tolerance for rk45");
        sub->add_option("--abs-tol", overrides.abs_tol, "Absolute tolerance for rk45");
        sub->add_option("--samples", overrides.samples, "Report grid samples");
        sub->add_flag("--emit-gnuplot", options.emit_gnuplot, "Write a gnuplot script next to the CSVs");
    };

    auto* derive = app.add_subcommand("derive", "Derive the equation of motion, momenta and Hamiltonian");
    add_common(derive);
    derive->add_flag("--symbolic", options.symbolic, "Keep parameters symbolic");

    auto* simulate = app.add_subcommand("simulate", "Integrate the equation of motion");
    add_common(simulate);
    add_numeric(simulate);

    auto* analyze = app.add_subcommand("analyze", "Compare full and Newtonian dynamics");
    add_common(analyze);
    add_numeric(analyze);

    auto* sweep = app.add_subcommand("sweep", "Repeat analyze over parameter values");
    add_common(sweep);
    add_numeric(sweep);
    sweep->add_option("--sweep", overrides.sweep_parameter, "Parameter to sweep");
    sweep->add_option("--values", overrides.sweep_values, "Comma separated parameter values");
    sweep->add_option("--jobs", options.jobs, "Concurrent rows")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config;
    }

    try {
        RunConfig config = config_path.empty() ? RunConfig{} : load_config(config_path);
        apply_overrides(config, overrides);
        config.validate();
        if (derive->parsed()) return cmd_derive(config, options, std::cout);
        if (simulate->parsed()) return cmd_simulate(config, options);
        if (analyze->parsed()) return cmd_analyze(config, options);
        return cmd_sweep(config, options);
    } catch (const std::exception& e) {
        std::cerr << "ostro: error: " << e.what() << '\n';
        return exit_code_for(std::current_exception());
    }
}

}  // namespace ostro::cli
