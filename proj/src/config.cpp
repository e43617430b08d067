#include "hes1/config.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>

namespace hes1 {
namespace {

double number(const nlohmann::json& j, const char* key) {
    const auto& v = j.at(key);
    if (!v.is_number()) throw DomainError(std::string("'") + key + "' must be a number");
    return v.get<double>();
}

std::vector<double> numbers(const nlohmann::json& j, const char* key) {
    const auto& v = j.at(key);
    if (!v.is_array()) throw DomainError(std::string("'") + key + "' must be an array");
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number()) throw DomainError(std::string("'") + key + "' entries must be numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

nlohmann::json rounded(std::span<const double> v) {
    auto a = nlohmann::json::array();
    for (double x : v) a.push_back(round15(x));
    return a;
}

} // namespace

double round15(double v) {
    if (!std::isfinite(v)) return v;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return std::strtod(buf, nullptr);
}

ParamValues params_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw DomainError("parameter file must hold a JSON object");
    static const std::set<std::string> known{"n",     "k",      "gamma", "kk",   "delta1",
                                             "delta2", "theta", "eps1",  "eps2", "hill_r0"};
    for (const auto& [key, _] : j.items())
        if (!known.contains(key))
            throw DomainError("unknown parameter key '" + key + "'" +
                              (key == "r0" ? " (r0 is derived, use hill_r0 for the Hill form)" : ""));
    try {
        ParamValues v;
        const auto& n = j.at("n");
        if (!n.is_number_integer()) throw DomainError("'n' must be an integer");
        v.n = n.get<int>();
        v.kk = number(j, "kk");
        v.delta1 = number(j, "delta1");
        v.delta2 = number(j, "delta2");
        v.theta = number(j, "theta");
        v.eps1 = number(j, "eps1");
        v.eps2 = number(j, "eps2");
        if (j.contains("hill_r0")) {
            v.hill_r0 = number(j, "hill_r0");
            v.k_binding.clear();
            v.gamma.clear();
        } else {
            v.k_binding = numbers(j, "k");
            v.gamma = numbers(j, "gamma");
        }
        return v;
    } catch (const nlohmann::json::out_of_range& e) {
        throw DomainError(std::string("missing parameter key: ") + e.what());
    }
}

nlohmann::json params_to_json(const ModelParams& p) {
    nlohmann::json j;
    j["n"] = p.n();
    if (p.has_binding_chain()) {
        j["k"] = rounded(p.k_binding());
        j["gamma"] = rounded(p.gammas());
    } else {
        j["hill_r0"] = round15(p.r0());
    }
    j["kk"] = round15(p.kk());
    j["delta1"] = round15(p.delta1());
    j["delta2"] = round15(p.delta2());
    j["theta"] = round15(p.theta());
    j["eps1"] = round15(p.eps1());
    j["eps2"] = round15(p.eps2());
    return j;
}

ModelParams load_params(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DomainError("cannot open parameter file '" + path + "'");
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw DomainError("malformed parameter file '" + path + "': " + e.what());
    }
    return ModelParams(params_from_json(j));
}

void save_params(const std::string& path, const ModelParams& p) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
    os << params_to_json(p).dump(2) << '\n';
}

ModelParams resolve_params(const std::string& preset_or_path) {
    for (const auto& name : preset_names())
        if (name == preset_or_path) return preset(name);
    if (std::filesystem::exists(preset_or_path)) return load_params(preset_or_path);
    std::string names;
    for (const auto& name : preset_names()) names += (names.empty() ? "" : ", ") + name;
    throw DomainError("unknown preset or missing file '" + preset_or_path + "' (presets: " + names + ")");
}

nlohmann::json config_to_json(const IntegratorConfig& cfg) {
    return {{"method", std::string(to_string(cfg.method))},
            {"rel_tol", cfg.rel_tol},
            {"abs_tol", cfg.abs_tol},
            {"t_end", round15(cfg.t_end)},
            {"sample_dt", round15(cfg.sample_dt)},
            {"max_steps", cfg.max_steps}};
}

} // namespace hes1
