#include "transduce/config.hpp"

#include <fstream>

namespace transduce {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::vector<std::string>& allowed,
                         const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
            throw ConfigError(where + ": unknown key '" + it.key() + "'");
    }
}

double number_at(const json& obj, const std::string& key, const std::string& where,
                 bool required = true, double fallback = 0.0) {
    if (!obj.contains(key)) {
        if (required) throw ConfigError(where + ": missing key '" + key + "'");
        return fallback;
    }
    const json& v = obj.at(key);
    if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
    return v.get<double>();
}

ModeParams mode_at(const json& obj, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    reject_unknown_keys(obj, {"detuning", "kappa_i", "kappa_ex"}, where);
    ModeParams mode;
    mode.detuning = number_at(obj, "detuning", where, false, 0.0);
    mode.kappa_intrinsic = number_at(obj, "kappa_i", where, false, 0.0);
    mode.kappa_external = number_at(obj, "kappa_ex", where, false, 0.0);
    return mode;
}

json load_document(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& err) {
        throw ConfigError(path.string() + ": " + err.what());
    }
}

}  // namespace

ChainConfig parse_chain_config(const json& doc) {
    if (!doc.is_object()) throw ConfigError("config: expected a JSON object");
    reject_unknown_keys(doc, {"label", "unit", "degenerate", "modes", "couplings"},
                        "config");

    ChainConfig config;
    if (doc.contains("label")) {
        if (!doc.at("label").is_string()) throw ConfigError("config.label: expected a string");
        config.label = doc.at("label").get<std::string>();
    }
    if (doc.contains("unit")) {
        if (!doc.at("unit").is_string()) throw ConfigError("config.unit: expected a string");
        config.unit = doc.at("unit").get<std::string>();
    }
    bool degenerate = false;
    if (doc.contains("degenerate")) {
        if (!doc.at("degenerate").is_boolean())
            throw ConfigError("config.degenerate: expected a boolean");
        degenerate = doc.at("degenerate").get<bool>();
    }

    if (!doc.contains("modes") || !doc.at("modes").is_array())
        throw ConfigError("config.modes: expected an array of mode objects");
    if (!doc.contains("couplings") || !doc.at("couplings").is_array())
        throw ConfigError("config.couplings: expected an array of numbers");

    std::vector<ModeParams> modes;
    for (std::size_t j = 0; j < doc.at("modes").size(); ++j)
        modes.push_back(mode_at(doc.at("modes")[j], "config.modes[" + std::to_string(j) + "]"));

    std::vector<double> couplings;
    for (std::size_t j = 0; j < doc.at("couplings").size(); ++j) {
        const json& v = doc.at("couplings")[j];
        if (!v.is_number())
            throw ConfigError("config.couplings[" + std::to_string(j) + "]: expected a number");
        couplings.push_back(v.get<double>());
    }

    try {
        config.chain = make_chain(std::move(modes), std::move(couplings), degenerate,
                                  &config.warnings);
    } catch (const InvalidRates& err) {
        throw ConfigError(std::string("config.") + err.what());
    }
    return config;
}

ChainConfig load_chain_config(const std::filesystem::path& path) {
    return parse_chain_config(load_document(path));
}

nlohmann::json chain_config_to_json(const TransducerChain& chain,
                                    const std::string& label,
                                    const std::string& unit) {
    json doc;
    if (!label.empty()) doc["label"] = label;
    if (!unit.empty()) doc["unit"] = unit;
    if (chain.allow_degenerate) doc["degenerate"] = true;
    doc["modes"] = json::array();
    for (const ModeParams& m : chain.modes)
        doc["modes"].push_back({{"detuning", m.detuning},
                                {"kappa_i", m.kappa_intrinsic},
                                {"kappa_ex", m.kappa_external}});
    doc["couplings"] = chain.couplings;
    return doc;
}

EnsembleSpec parse_ensemble_config(const json& doc) {
    if (!doc.is_object()) throw ConfigError("config: expected a JSON object");
    reject_unknown_keys(doc,
                        {"label", "atoms", "mode_a", "mode_b", "g_a", "g_23", "g_b",
                         "level2", "level3", "truncation"},
                        "config");

    EnsembleSpec spec;
    if (!doc.contains("atoms") || !doc.at("atoms").is_number_integer())
        throw ConfigError("config.atoms: expected an integer");
    spec.atom_count = doc.at("atoms").get<int>();

    if (!doc.contains("mode_a") || !doc.contains("mode_b"))
        throw ConfigError("config: mode_a and mode_b are required");
    spec.mode_a = mode_at(doc.at("mode_a"), "config.mode_a");
    spec.mode_b = mode_at(doc.at("mode_b"), "config.mode_b");

    spec.g_a = number_at(doc, "g_a", "config");
    spec.g_23 = number_at(doc, "g_23", "config");
    spec.g_b = number_at(doc, "g_b", "config");
    spec.truncation = number_at(doc, "truncation", "config", false, 20.0);

    auto level_at = [&](const std::string& key) {
        if (!doc.contains(key)) throw ConfigError("config." + key + ": missing");
        const json& obj = doc.at(key);
        if (!obj.is_object()) throw ConfigError("config." + key + ": expected an object");
        reject_unknown_keys(obj, {"detuning", "kappa", "gamma"}, "config." + key);
        EnsembleLevel level;
        level.detuning = number_at(obj, "detuning", "config." + key, false, 0.0);
        level.kappa = number_at(obj, "kappa", "config." + key, false, 0.0);
        level.gamma = number_at(obj, "gamma", "config." + key, false, 0.0);
        return level;
    };
    spec.level2 = level_at("level2");
    spec.level3 = level_at("level3");
    return spec;
}

EnsembleSpec load_ensemble_config(const std::filesystem::path& path) {
    return parse_ensemble_config(load_document(path));
}

}  // namespace transduce
