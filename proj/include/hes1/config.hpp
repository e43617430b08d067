#pragma once

#include "hes1/integrator.hpp"
#include "hes1/params.hpp"

#include <json.hpp>

#include <string>

namespace hes1 {

/// Parameter file schema (JSON object):
///   n       integer >= 0
///   k       array of n numbers, k[0] = 1
///   gamma   array of n numbers
///   kk, delta1, delta2, theta, eps1, eps2   numbers
///   hill_r0 optional number > 1; selects the Hill form (k, gamma ignored)
/// r0 is derived and never read; unknown keys are rejected.
ParamValues params_from_json(const nlohmann::json& j);
nlohmann::json params_to_json(const ModelParams& p);

ModelParams load_params(const std::string& path);
void save_params(const std::string& path, const ModelParams& p);

/// A preset name, or else a path to a parameter file.
ModelParams resolve_params(const std::string& preset_or_path);

/// Rounds to 15 significant digits so serialized numbers stay short and
/// reproducible.
double round15(double v);

nlohmann::json config_to_json(const IntegratorConfig& cfg);

} // namespace hes1
