#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "condex/cev.hpp"
#include "condex/harness.hpp"
#include "condex/marginal_fit.hpp"
#include "condex/mcqrnn.hpp"

namespace condex {

using Json = nlohmann::ordered_json;

[[nodiscard]] Json to_json(const GevParams& p);
[[nodiscard]] Json to_json(const GpParams& p);
[[nodiscard]] Json to_json(const WeibullParams& p);
[[nodiscard]] Json to_json(const CopulaSpec& c);
[[nodiscard]] Json to_json(const QuadraticWeibull& q);
[[nodiscard]] Json to_json(const CevConfig& c);
[[nodiscard]] Json to_json(const McqrnnConfig& c);
[[nodiscard]] Json to_json(const ScenarioSpec& s);
[[nodiscard]] Json to_json(const GevFit& f);
[[nodiscard]] Json to_json(const ReturnLevelCI& ci);
[[nodiscard]] Json to_json(const SemiParamMarginal& m);
[[nodiscard]] Json to_json(const CevFit& f);
[[nodiscard]] Json to_json(const McqrnnModel& m);

// Readers throw std::invalid_argument on missing or mistyped fields.
[[nodiscard]] GevParams gev_params_from_json(const Json& j);
[[nodiscard]] GpParams gp_params_from_json(const Json& j);
[[nodiscard]] WeibullParams weibull_params_from_json(const Json& j);
[[nodiscard]] CopulaSpec copula_from_json(const Json& j);
[[nodiscard]] QuadraticWeibull quadratic_weibull_from_json(const Json& j);
[[nodiscard]] CevConfig cev_config_from_json(const Json& j);
[[nodiscard]] McqrnnConfig mcqrnn_config_from_json(const Json& j);
/// Fields other than the margins and dependence fall back to defaults.
[[nodiscard]] ScenarioSpec scenario_from_json(const Json& j);
[[nodiscard]] GevFit gev_fit_from_json(const Json& j);
/// Verifies the stored sample digest.
[[nodiscard]] SemiParamMarginal semiparam_from_json(const Json& j);
[[nodiscard]] CevFit cev_fit_from_json(const Json& j);
[[nodiscard]] McqrnnModel mcqrnn_model_from_json(const Json& j);

[[nodiscard]] Json load_json(const std::string& path);
void save_json(const std::string& path, const Json& j);

}  // namespace condex
