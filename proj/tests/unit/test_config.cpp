#include <doctest.h>

#include <json.hpp>

#include "transduce/config.hpp"
#include "transduce/scattering.hpp"

using namespace transduce;
using nlohmann::json;

namespace {

json valid_doc() {
    return json::parse(R"({
        "label": "pair",
        "unit": "MHz",
        "modes": [
            {"detuning": 0.1, "kappa_i": 0.0, "kappa_ex": 1.0},
            {"detuning": -0.2, "kappa_i": 0.5, "kappa_ex": 0.0},
            {"detuning": 0.0, "kappa_i": 0.2, "kappa_ex": 2.0}
        ],
        "couplings": [0.5, 0.8]
    })");
}

}  // namespace

TEST_CASE("chain config parsing") {
    SUBCASE("valid document") {
        const ChainConfig config = parse_chain_config(valid_doc());
        CHECK(config.label == "pair");
        CHECK(config.unit == "MHz");
        CHECK(config.chain.stages() == 1);
        CHECK(config.chain.modes[1].kappa_intrinsic == 0.5);
        CHECK(config.warnings.empty());
    }
    SUBCASE("missing mode fields default to zero") {
        json doc = json::parse(
            R"({"modes": [{"kappa_ex": 1.0}, {"kappa_ex": 1.0}], "couplings": [0.5]})");
        const ChainConfig config = parse_chain_config(doc);
        CHECK(config.chain.modes[0].detuning == 0.0);
    }
    SUBCASE("unknown top-level key is rejected by name") {
        json doc = valid_doc();
        doc["coupling"] = json::array({0.5});
        CHECK_THROWS_WITH_AS(parse_chain_config(doc), doctest::Contains("coupling"),
                             ConfigError);
    }
    SUBCASE("unknown mode key is rejected with its path") {
        json doc = valid_doc();
        doc["modes"][1]["kappa_ext"] = 0.3;
        CHECK_THROWS_WITH_AS(parse_chain_config(doc), doctest::Contains("modes[1]"),
                             ConfigError);
    }
    SUBCASE("coupling count mismatch cites the field") {
        json doc = valid_doc();
        doc["couplings"] = json::array({0.5});
        CHECK_THROWS_WITH_AS(parse_chain_config(doc), doctest::Contains("couplings"),
                             ConfigError);
    }
    SUBCASE("non-numeric coupling is rejected") {
        json doc = valid_doc();
        doc["couplings"][0] = "0.5";
        CHECK_THROWS_WITH_AS(parse_chain_config(doc), doctest::Contains("couplings[0]"),
                             ConfigError);
    }
    SUBCASE("negative coupling produces a warning, not an error") {
        json doc = valid_doc();
        doc["couplings"][1] = -0.8;
        const ChainConfig config = parse_chain_config(doc);
        REQUIRE(config.warnings.size() == 1);
        CHECK(config.chain.couplings[1] == 0.8);
    }
    SUBCASE("zero coupling needs the degenerate flag") {
        json doc = valid_doc();
        doc["couplings"][0] = 0.0;
        CHECK_THROWS_AS(parse_chain_config(doc), ConfigError);
        doc["degenerate"] = true;
        CHECK_NOTHROW(parse_chain_config(doc));
    }
}

TEST_CASE("chain config round-trips exactly") {
    const ChainConfig config = parse_chain_config(valid_doc());
    const json emitted = chain_config_to_json(config.chain, config.label, config.unit);
    const ChainConfig again = parse_chain_config(emitted);
    REQUIRE(again.chain.size() == config.chain.size());
    for (std::size_t j = 0; j < config.chain.size(); ++j) {
        CHECK(again.chain.modes[j].detuning == config.chain.modes[j].detuning);
        CHECK(again.chain.modes[j].kappa_intrinsic ==
              config.chain.modes[j].kappa_intrinsic);
        CHECK(again.chain.modes[j].kappa_external ==
              config.chain.modes[j].kappa_external);
    }
    CHECK(again.chain.couplings == config.chain.couplings);
    // Identical physics out of the re-ingested document.
    CHECK(efficiency_closed_form(again.chain, 0.37) ==
          efficiency_closed_form(config.chain, 0.37));
}

TEST_CASE("ensemble config parsing") {
    json doc = json::parse(R"({
        "atoms": 100,
        "mode_a": {"kappa_ex": 1.0},
        "mode_b": {"kappa_ex": 1.2},
        "g_a": 0.4, "g_23": 0.6, "g_b": 0.5,
        "level2": {"detuning": 0.0, "kappa": 0.8, "gamma": 0.1},
        "level3": {"kappa": 0.9}
    })");
    const EnsembleSpec spec = parse_ensemble_config(doc);
    CHECK(spec.atom_count == 100);
    CHECK(spec.level2.gamma == 0.1);
    CHECK(spec.level3.gamma == 0.0);
    CHECK(spec.truncation == 20.0);

    SUBCASE("unknown keys rejected") {
        doc["gamma_2"] = 0.1;
        CHECK_THROWS_WITH_AS(parse_ensemble_config(doc), doctest::Contains("gamma_2"),
                             ConfigError);
    }
    SUBCASE("atoms must be an integer") {
        doc["atoms"] = 1.5;
        CHECK_THROWS_AS(parse_ensemble_config(doc), ConfigError);
    }
}
