#pragma once

#include "ostro/dynamics.hpp"
#include "ostro/variational.hpp"

#include "json.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ostro::cli {

inline constexpr double planck_constant = 6.62607015e-34;

class ConfigError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SweepSpec {
    std::string parameter;
    std::vector<double> values;
};

struct RunConfig {
    std::string lagrangian;
    std::optional<std::string> newtonian_lagrangian;
    Parameters parameters;
    std::vector<double> initial_state;
    double t0 = 0.0;
    double t_end = 10.0;
    IntegratorConfig integrator;
    double h = 1.0;
    double mass = 1.0;
    std::optional<std::vector<double>> alphas;
    int report_samples = 256;
    int taylor_order = 8;
    int quadrature_intervals = 1024;
    int q_terms = 0;
    std::string out_dir = "out";
    std::optional<SweepSpec> sweep;

    void validate() const;
};

/// Command-line values that take precedence over the file.
struct Overrides {
    std::optional<std::string> lagrangian;
    std::optional<double> h;
    bool planck = false;
    std::optional<double> mass;
    std::optional<double> t_end;
    std::optional<std::string> method;
    std::optional<double> step;
    std::optional<double> tol;
    std::optional<double> abs_tol;
    std::optional<int> samples;
    std::optional<std::string> out_dir;
    std::vector<std::string> params;  ///< "name=value"
    std::optional<std::string> sweep_parameter;
    std::optional<std::string> sweep_values;  ///< comma separated
};

RunConfig config_from_json(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const RunConfig& config);

void apply_overrides(RunConfig& config, const Overrides& overrides);

std::vector<double> parse_value_list(const std::string& text);

}  // namespace ostro::cli
