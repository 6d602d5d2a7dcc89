#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "thermo/config.hpp"

using namespace thermo;

namespace {

std::string location_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.location();
    }
    return "<accepted>";
}

}  // namespace

TEST(Config, DefaultsRoundTrip) {
    RunConfig c;
    EXPECT_EQ(parse_config(emit_config(c)), c);
    EXPECT_EQ(parse_config("{}"), c);
}

TEST(Config, ShippedExamplesRoundTrip) {
    int seen = 0;
    for (const auto& entry : std::filesystem::directory_iterator(THERMO_CONFIG_DIR)) {
        if (entry.path().extension() != ".json") continue;
        RunConfig c = load_config(entry.path().string());
        EXPECT_EQ(parse_config(emit_config(c)), c) << entry.path();
        EXPECT_NO_THROW(build_potential(c.potential, build_map(c.map))) << entry.path();
        ++seen;
    }
    EXPECT_GE(seen, 5);
}

TEST(Config, CustomMapRoundTrip) {
    RunConfig c = load_config(std::string(THERMO_CONFIG_DIR) + "/farey_custom.json");
    ASSERT_EQ(c.map.branches.size(), 2u);
    EXPECT_EQ(c.map.branches[1].parabolic_point, std::optional<double>(1.0));
    EXPECT_EQ(c.potential.coefficients, (std::vector<double>{0.0, 1.0}));
    EXPECT_EQ(c.truncation.n_max, 128);
    RunConfig back = parse_config(emit_config(c));
    EXPECT_EQ(back, c);
    EXPECT_EQ(canonical_config(back), canonical_config(c));
}

TEST(Config, UnknownKeyReportsLocation) {
    EXPECT_EQ(location_of(R"({"map": {"builtin": "manneville_pomeau", "betta": 1}})"), "/map/betta");
    EXPECT_EQ(location_of(R"({"extra": 1})"), "/extra");
    EXPECT_EQ(location_of(R"({"tolerances": {"eigentol": 1e-12}})"), "/tolerances/eigentol");
}

TEST(Config, SyntaxErrorReportsLineAndColumn) {
    std::string loc = location_of("{\n  \"map\": {\n    \"beta\": 1,,\n  }\n}");
    EXPECT_EQ(loc.rfind("line 3, column", 0), 0u) << loc;
}

TEST(Config, LoadPrefixesPath) {
    const auto p = std::filesystem::temp_directory_path() / "thermo_bad_config.json";
    std::ofstream(p) << R"({"truncation": {"n_max": "many"}})";
    try {
        load_config(p.string());
        FAIL() << "expected a config error";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.location(), p.string() + ":/truncation/n_max");
        EXPECT_NE(std::string(e.what()).find("wrong type"), std::string::npos);
    }
    std::filesystem::remove(p);
    EXPECT_THROW(load_config("/nonexistent/thermo.json"), ConfigError);
}

TEST(Config, InvalidValuesRejected) {
    EXPECT_EQ(location_of(R"({"map": {"beta": -1}})"), "/map/beta");
    EXPECT_EQ(location_of(R"({"map": {"builtin": "tent"}})"), "/map/builtin");
    EXPECT_EQ(location_of(R"({"truncation": {"n_max": 2}})"), "/truncation/n_max");
    EXPECT_EQ(location_of(R"({"truncation": {"depth": 3}})"), "/truncation/depth");
    EXPECT_EQ(location_of(R"({"tolerances": {"q_tol": 0}})"), "/tolerances/q_tol");
    EXPECT_EQ(location_of(R"({"output": {"format": "xml"}})"), "/output/format");
    EXPECT_EQ(location_of(R"({"potential": {"kind": "polynomial", "coefficients": []}})"), "/potential/coefficients");
    EXPECT_EQ(location_of(R"({"map": {"builtin": "custom", "gamma": 1, "branches": []}})"), "/map/branches");
}

TEST(Config, InapplicableKeysRejected) {
    EXPECT_EQ(location_of(R"({"map": {"builtin": "farey_like", "beta": 1}})"), "/map/beta");
    EXPECT_EQ(location_of(R"({"map": {"builtin": "manneville_pomeau", "gamma": 1}})"), "/map/gamma");
    EXPECT_EQ(location_of(R"({"potential": {"kind": "identity", "value": 2}})"), "/potential/value");
    EXPECT_EQ(location_of(R"({"potential": {"kind": "constant", "coefficients": [1]}})"), "/potential/coefficients");
}

TEST(Config, CanonicalFormIsKeyOrderIndependent) {
    RunConfig a = parse_config(R"({"potential": {"kind": "constant", "value": 0.5}, "map": {"beta": 0.5}})");
    RunConfig b = parse_config(R"({"map": {"beta": 0.5}, "potential": {"value": 0.5, "kind": "constant"}})");
    EXPECT_EQ(canonical_config(a), canonical_config(b));
    b.map.beta = 0.25;
    EXPECT_NE(canonical_config(a), canonical_config(b));
}

TEST(Config, SettingsFollowConfig) {
    RunConfig c = parse_config(R"({"truncation": {"n_max": 64, "depth": 0}, "tolerances": {"plateau_band": 0.05, "q_tol": 1e-8}})");
    EngineSettings es = engine_settings(c);
    EXPECT_EQ(es.n_max, 64);
    EXPECT_EQ(es.depth, 0);
    EXPECT_EQ(spectrum_settings(c).q_tol, 1e-8);
    EXPECT_EQ(plateau_settings(c).band, 0.05);
}
