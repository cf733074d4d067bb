#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "nmc/common.hpp"
#include "nmc/functional.hpp"
#include "nmc/intensity.hpp"
#include "nmc/perturbation.hpp"
#include "nmc/variational.hpp"

namespace nmc {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Model document: {"kind": "...", ...} with kind one of constant,
// exponential_time, time_only, space_only, tabulated.
inline IntensityModel model_from_json(const nlohmann::json& j)
{
    if (!j.is_object() || !j.contains("kind"))
        throw ConfigError("model config: missing 'kind'");
    const std::string kind = j.at("kind").get<std::string>();
    try {
        if (kind == "constant")
            return IntensityModel::constant(j.at("alpha").get<double>());
        if (kind == "exponential_time")
            return IntensityModel::exponential_time(j.at("lambda").get<double>());
        if (kind == "time_only")
            return IntensityModel::time_only(
                j.at("times").get<std::vector<double>>(),
                j.at("values").get<std::vector<double>>());
        if (kind == "space_only")
            return IntensityModel::space_only(
                j.at("z_min").get<int>(),
                j.at("values").get<std::vector<double>>());
        if (kind == "tabulated")
            return IntensityModel::tabulated(
                j.at("times").get<std::vector<double>>(),
                j.at("z_min").get<int>(),
                j.at("values").get<std::vector<std::vector<double>>>());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("model config: ") + e.what());
    } catch (const DomainError& e) {
        throw ConfigError(std::string("model config: ") + e.what());
    }
    throw ConfigError("model config: unknown kind '" + kind + "'");
}

inline Perturbation perturbation_from_json(const nlohmann::json& j)
{
    if (!j.is_object() || !j.contains("kind"))
        throw ConfigError("perturbation config: missing 'kind'");
    const std::string kind = j.at("kind").get<std::string>();
    double amp = j.value("amplitude", 1.0);
    if (kind == "sine") return Perturbation::sine(j.at("k").get<int>(), amp);
    if (kind == "bump") return Perturbation::bump(j.at("m").get<int>(), amp);
    throw ConfigError("perturbation config: unknown kind '" + kind + "'");
}

// Named functionals of the test dictionary.
inline SimpleFunctional functional_from_name(const std::string& name)
{
    if (name == "T1") return SimpleFunctional::jump_time(1);
    if (name == "T1T2")
        return SimpleFunctional::jump_time(1) * SimpleFunctional::jump_time(2);
    if (name == "exp(-T1)")
        return SimpleFunctional::jump_time(1).scaled(-1.0).exp();
    if (name == "parity*T1")
        return SimpleFunctional::initial_state_parity() *
               SimpleFunctional::jump_time(1);
    throw ConfigError("unknown functional name '" + name + "'");
}

// Either the string "default" or an array of {"phi": name, "u": {...}}.
inline Dictionary dictionary_from_json(const nlohmann::json& j)
{
    if (j.is_null() || (j.is_string() && j.get<std::string>() == "default"))
        return default_dictionary();
    if (!j.is_array() || j.empty())
        throw ConfigError("dictionary config: expected 'default' or an array");
    Dictionary dict;
    for (const auto& entry : j)
        dict.emplace_back(functional_from_name(entry.at("phi").get<std::string>()),
                          perturbation_from_json(entry.at("u")));
    return dict;
}

} // namespace nmc
