#ifndef TRANSDUCE_CONFIG_HPP
#define TRANSDUCE_CONFIG_HPP

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "transduce/chain.hpp"
#include "transduce/ensemble.hpp"

namespace transduce {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ChainConfig {
    TransducerChain chain;
    std::string label;
    std::string unit;
    std::vector<std::string> warnings;
};

// Strict schema: unknown keys are rejected (a typo in a physics parameter
// must not pass silently), messages cite the offending field.
ChainConfig parse_chain_config(const nlohmann::json& doc);
ChainConfig load_chain_config(const std::filesystem::path& path);

nlohmann::json chain_config_to_json(const TransducerChain& chain,
                                    const std::string& label = "",
                                    const std::string& unit = "");

EnsembleSpec parse_ensemble_config(const nlohmann::json& doc);
EnsembleSpec load_ensemble_config(const std::filesystem::path& path);

}  // namespace transduce

#endif  // TRANSDUCE_CONFIG_HPP
