#include "cli/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>

namespace ostro::cli {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where)
{
    for (const auto& [key, value] : obj.items()) {
        if (!known.contains(key)) throw ConfigError("unknown field '" + where + key + "'");
    }
}

template <typename T>
T field(const json& obj, const std::string& key, const std::string& where)
{
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("field '" + where + key + "' has the wrong type");
    }
}

template <typename T>
void read_optional(const json& obj, const std::string& key, T& out, const std::string& where = "")
{
    if (obj.contains(key)) out = field<T>(obj, key, where);
}

double parse_double(std::string_view text, const std::string& what)
{
    double v = 0.0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || end != text.data() + text.size() || text.empty())
        throw ConfigError("invalid number '" + std::string(text) + "' in " + what);
    return v;
}

void require_finite(double v, const char* name)
{
    if (!std::isfinite(v)) throw ConfigError(std::string("field '") + name + "' must be finite");
}

}  // namespace

void RunConfig::validate() const
{
    if (lagrangian.empty()) throw ConfigError("missing field 'lagrangian'");
    require_finite(t0, "t0");
    require_finite(t_end, "t_end");
    if (!(t_end > t0)) throw ConfigError("field 't_end' must exceed 't0'");
    if (!(h > 0.0)) throw ConfigError("field 'h' must be positive");
    if (!(mass > 0.0)) throw ConfigError("field 'mass' must be positive");
    if (report_samples < 2) throw ConfigError("field 'report_samples' must be >= 2");
    if (taylor_order < 2) throw ConfigError("field 'taylor_order' must be >= 2");
    if (quadrature_intervals < 2 || quadrature_intervals % 2 != 0)
        throw ConfigError("field 'quadrature_intervals' must be even and >= 2");
    if (q_terms < 0) throw ConfigError("field 'q_terms' must be >= 0");
    if (alphas && alphas->size() < 2) throw ConfigError("field 'alphas' needs at least two entries");
    for (const double v : initial_state) require_finite(v, "initial_state");
    for (const auto& [name, v] : parameters) require_finite(v, "parameters");
    try {
        integrator.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("integrator: ") + e.what());
    }
    if (sweep && sweep->values.empty()) throw ConfigError("field 'sweep.values' is empty");
}

RunConfig config_from_json(const json& doc)
{
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    reject_unknown(doc,
                   {"lagrangian", "newtonian_lagrangian", "parameters", "initial_state", "t0", "t_end", "integrator",
                    "h", "mass", "alphas", "report_samples", "taylor_order", "quadrature_intervals", "q_terms",
                    "out_dir", "sweep"},
                   "");
    RunConfig c;
    read_optional(doc, "lagrangian", c.lagrangian);
    if (doc.contains("newtonian_lagrangian")) c.newtonian_lagrangian = field<std::string>(doc, "newtonian_lagrangian", "");
    if (doc.contains("parameters")) {
        const json& p = doc.at("parameters");
        if (!p.is_object()) throw ConfigError("field 'parameters' must be an object");
        for (const auto& [name, value] : p.items()) c.parameters[name] = field<double>(p, name, "parameters.");
    }
    read_optional(doc, "initial_state", c.initial_state);
    read_optional(doc, "t0", c.t0);
    read_optional(doc, "t_end", c.t_end);
    if (doc.contains("integrator")) {
        const json& i = doc.at("integrator");
        if (!i.is_object()) throw ConfigError("field 'integrator' must be an object");
        reject_unknown(i, {"method", "step", "rel_tol", "abs_tol", "max_steps"}, "integrator.");
        if (i.contains("method")) {
            try {
                c.integrator.method = method_from_name(field<std::string>(i, "method", "integrator."));
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
        }
        read_optional(i, "step", c.integrator.step, "integrator.");
        read_optional(i, "rel_tol", c.integrator.rel_tol, "integrator.");
        read_optional(i, "abs_tol", c.integrator.abs_tol, "integrator.");
        read_optional(i, "max_steps", c.integrator.max_steps, "integrator.");
    }
    read_optional(doc, "h", c.h);
    read_optional(doc, "mass", c.mass);
    if (doc.contains("alphas")) c.alphas = field<std::vector<double>>(doc, "alphas", "");
    read_optional(doc, "report_samples", c.report_samples);
    read_optional(doc, "taylor_order", c.taylor_order);
    read_optional(doc, "quadrature_intervals", c.quadrature_intervals);
    read_optional(doc, "q_terms", c.q_terms);
    read_optional(doc, "out_dir", c.out_dir);
    if (doc.contains("sweep")) {
        const json& s = doc.at("sweep");
        if (!s.is_object()) throw ConfigError("field 'sweep' must be an object");
        reject_unknown(s, {"parameter", "values"}, "sweep.");
        SweepSpec spec;
        read_optional(s, "parameter", spec.parameter, "sweep.");
        read_optional(s, "values", spec.values, "sweep.");
        c.sweep = std::move(spec);
    }
    return c;
}

RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return config_from_json(doc);
}

json config_to_json(const RunConfig& c)
{
    json doc;
    doc["lagrangian"] = c.lagrangian;
    if (c.newtonian_lagrangian) doc["newtonian_lagrangian"] = *c.newtonian_lagrangian;
    doc["parameters"] = json::object();
    for (const auto& [name, v] : c.parameters) doc["parameters"][name] = v;
    doc["initial_state"] = c.initial_state;
    doc["t0"] = c.t0;
    doc["t_end"] = c.t_end;
    doc["integrator"] = {{"method", std::string(method_name(c.integrator.method))},
                         {"step", c.integrator.step},
                         {"rel_tol", c.integrator.rel_tol},
                         {"abs_tol", c.integrator.abs_tol},
                         {"max_steps", c.integrator.max_steps}};
    doc["h"] = c.h;
    doc["mass"] = c.mass;
    if (c.alphas) doc["alphas"] = *c.alphas;
    doc["report_samples"] = c.report_samples;
    doc["taylor_order"] = c.taylor_order;
    doc["quadrature_intervals"] = c.quadrature_intervals;
    doc["q_terms"] = c.q_terms;
    if (c.sweep) doc["sweep"] = {{"parameter", c.sweep->parameter}, {"values", c.sweep->values}};
    return doc;
}

std::vector<double> parse_value_list(const std::string& text)
{
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t comma = std::min(text.find(',', start), text.size());
        std::string_view cell(text.data() + start, comma - start);
        while (!cell.empty() && cell.front() == ' ') cell.remove_prefix(1);
        while (!cell.empty() && cell.back() == ' ') cell.remove_suffix(1);
        out.push_back(parse_double(cell, "value list"));
        start = comma + 1;
    }
    return out;
}

void apply_overrides(RunConfig& c, const Overrides& o)
{
    if (o.lagrangian) c.lagrangian = *o.lagrangian;
    if (o.planck) c.h = planck_constant;
    if (o.h) c.h = *o.h;
    if (o.mass) c.mass = *o.mass;
    if (o.t_end) c.t_end = *o.t_end;
    if (o.method) {
        try {
            c.integrator.method = method_from_name(*o.method);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
    if (o.step) c.integrator.step = *o.step;
    if (o.tol) c.integrator.rel_tol = *o.tol;
    if (o.abs_tol) c.integrator.abs_tol = *o.abs_tol;
    if (o.samples) c.report_samples = *o.samples;
    if (o.out_dir) c.out_dir = *o.out_dir;
    for (const auto& assignment : o.params) {
        const auto eq = assignment.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("--param expects name=value, got '" + assignment + "'");
        c.parameters[assignment.substr(0, eq)] = parse_double(std::string_view(assignment).substr(eq + 1), "--param");
    }
    if (o.sweep_parameter || o.sweep_values) {
        SweepSpec spec = c.sweep.value_or(SweepSpec{});
        if (o.sweep_parameter) spec.parameter = *o.sweep_parameter;
        if (o.sweep_values) spec.values = parse_value_list(*o.sweep_values);
        c.sweep = std::move(spec);
    }
}

}  // namespace ostro::cli
