#ifndef THERMO_CONFIG_HPP
#define THERMO_CONFIG_HPP

#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "interval_map.hpp"
#include "numerics.hpp"
#include "pressure_engine.hpp"
#include "spectrum.hpp"

namespace thermo {

struct CustomBranchConfig {
    double lo = 0.0, hi = 1.0;
    double a0 = 0.0, a1 = 1.0, c = 0.0, x0 = 0.0, e = 1.0, d0 = 1.0, d1 = 0.0;
    std::optional<double> parabolic_point;
    bool operator==(const CustomBranchConfig&) const = default;
};

struct MapConfig {
    std::string builtin = "manneville_pomeau";  // manneville_pomeau | farey_like | custom
    double beta = 1.0;
    double gamma = 1.0;  // custom maps only
    std::vector<CustomBranchConfig> branches;
    bool operator==(const MapConfig&) const = default;
};

struct PotentialConfig {
    std::string kind = "identity";  // identity | geometric | constant | polynomial
    double value = 1.0;
    std::vector<double> coefficients;
    bool operator==(const PotentialConfig&) const = default;
};

struct TruncationConfig {
    int n_max = 256;
    int depth = 1;
    int nodes = 24;
    int checks = 64;
    bool operator==(const TruncationConfig&) const = default;
};

struct ToleranceConfig {
    double eigen_tol = 1e-14;
    double s_polish_tol = 1e-13;
    double margin = 1e-6;
    double fd_step = 1e-4;
    double second_step = 5e-3;
    double derivative_rtol = 1e-2;
    double convexity_tol = 1e-6;
    double power_band = 0.02;
    double plateau_band = 0.02;
    double q_tol = 1e-10;
    double b_tol = 1e-10;
    double res_p_tol = 1e-5;
    double res_dq_tol = 1e-4;
    bool operator==(const ToleranceConfig&) const = default;
};

struct OutputConfig {
    std::string format = "auto";  // auto | json | csv
    std::string path;              // empty for stdout
    bool operator==(const OutputConfig&) const = default;
};

struct CacheConfig {
    std::string directory = ".thermo-cache";
    bool enabled = true;
    bool operator==(const CacheConfig&) const = default;
};

struct RunConfig {
    MapConfig map;
    PotentialConfig potential;
    TruncationConfig truncation;
    ToleranceConfig tolerances;
    OutputConfig output;
    CacheConfig cache;
    bool operator==(const RunConfig&) const = default;
};

class ConfigError : public Error {
public:
    ConfigError(std::string location, const std::string& msg)
        : Error(ErrorKind::Config, location + ": " + msg), location_(std::move(location)), message_(msg) {}
    const std::string& location() const { return location_; }
    const std::string& message() const { return message_; }

private:
    std::string location_;
    std::string message_;
};

namespace detail {

using json = nlohmann::json;

class Reader {
public:
    Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) throw ConfigError(where_, "expected an object");
    }

    template <class T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        auto it = j_.find(key);
        if (it == j_.end()) return;
        try {
            out = it->template get<T>();
        } catch (const json::exception&) {
            throw ConfigError(path(key), std::string("wrong type (got ") + it->type_name() + ")");
        }
    }

    void get(const char* key, std::optional<double>& out) {
        seen_.insert(key);
        auto it = j_.find(key);
        if (it == j_.end() || it->is_null()) return;
        if (!it->is_number()) throw ConfigError(path(key), std::string("wrong type (got ") + it->type_name() + ")");
        out = it->get<double>();
    }

    const json* child(const char* key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    bool has(const char* key) const { return j_.contains(key); }

    std::string path(const std::string& key) const { return where_ + "/" + key; }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw ConfigError(path(it.key()), "unknown key");
    }

private:
    const json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

inline void require(bool ok, const std::string& where, const std::string& msg) {
    if (!ok) throw ConfigError(where, msg);
}

inline std::string line_col(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace detail

inline nlohmann::json to_json(const RunConfig& c) {
    using json = nlohmann::json;
    json map = {{"builtin", c.map.builtin}};
    if (c.map.builtin == "manneville_pomeau") map["beta"] = c.map.beta;
    if (c.map.builtin == "custom") {
        map["gamma"] = c.map.gamma;
        json br = json::array();
        for (const auto& b : c.map.branches) {
            json o = {{"domain", {b.lo, b.hi}}, {"a0", b.a0}, {"a1", b.a1}, {"c", b.c}, {"x0", b.x0},
                      {"e", b.e},             {"d0", b.d0}, {"d1", b.d1}};
            if (b.parabolic_point) o["parabolic_point"] = *b.parabolic_point;
            br.push_back(o);
        }
        map["branches"] = br;
    }
    json pot = {{"kind", c.potential.kind}};
    if (c.potential.kind == "constant") pot["value"] = c.potential.value;
    if (c.potential.kind == "polynomial") pot["coefficients"] = c.potential.coefficients;
    const auto& t = c.tolerances;
    return json{
        {"map", map},
        {"potential", pot},
        {"truncation",
         {{"n_max", c.truncation.n_max}, {"depth", c.truncation.depth}, {"nodes", c.truncation.nodes}, {"checks", c.truncation.checks}}},
        {"tolerances",
         {{"eigen_tol", t.eigen_tol},
          {"s_polish_tol", t.s_polish_tol},
          {"margin", t.margin},
          {"fd_step", t.fd_step},
          {"second_step", t.second_step},
          {"derivative_rtol", t.derivative_rtol},
          {"convexity_tol", t.convexity_tol},
          {"power_band", t.power_band},
          {"plateau_band", t.plateau_band},
          {"q_tol", t.q_tol},
          {"b_tol", t.b_tol},
          {"res_p_tol", t.res_p_tol},
          {"res_dq_tol", t.res_dq_tol}}},
        {"output", {{"format", c.output.format}, {"path", c.output.path}}},
        {"cache", {{"directory", c.cache.directory}, {"enabled", c.cache.enabled}}},
    };
}

inline RunConfig from_json(const nlohmann::json& j) {
    using detail::require;
    RunConfig c;
    detail::Reader root(j, "");
    if (const auto* m = root.child("map")) {
        detail::Reader r(*m, "/map");
        r.get("builtin", c.map.builtin);
        r.get("beta", c.map.beta);
        r.get("gamma", c.map.gamma);
        if (const auto* br = r.child("branches")) {
            require(br->is_array(), "/map/branches", "expected an array");
            for (std::size_t k = 0; k < br->size(); ++k) {
                const std::string where = "/map/branches/" + std::to_string(k);
                detail::Reader b((*br)[k], where);
                CustomBranchConfig cb;
                std::vector<double> dom{cb.lo, cb.hi};
                b.get("domain", dom);
                require(dom.size() == 2, where + "/domain", "expected [lo, hi]");
                cb.lo = dom[0];
                cb.hi = dom[1];
                b.get("a0", cb.a0);
                b.get("a1", cb.a1);
                b.get("c", cb.c);
                b.get("x0", cb.x0);
                b.get("e", cb.e);
                b.get("d0", cb.d0);
                b.get("d1", cb.d1);
                b.get("parabolic_point", cb.parabolic_point);
                b.finish();
                c.map.branches.push_back(cb);
            }
        }
        const std::string& nm = c.map.builtin;
        if (nm != "manneville_pomeau") require(!r.has("beta"), "/map/beta", "only allowed for manneville_pomeau");
        if (nm != "custom") {
            require(!r.has("gamma"), "/map/gamma", "only allowed for custom maps");
            require(!r.has("branches"), "/map/branches", "only allowed for custom maps");
        }
        r.finish();
    }
    const std::string& name = c.map.builtin;
    require(name == "manneville_pomeau" || name == "farey_like" || name == "custom", "/map/builtin",
            "unknown map '" + name + "'");
    if (name == "manneville_pomeau") require(c.map.beta > 0, "/map/beta", "must be positive");
    if (name == "custom") {
        require(c.map.gamma > 0, "/map/gamma", "must be positive");
        require(c.map.branches.size() >= 2, "/map/branches", "a custom map needs at least two branches");
    }

    if (const auto* p = root.child("potential")) {
        detail::Reader r(*p, "/potential");
        r.get("kind", c.potential.kind);
        r.get("value", c.potential.value);
        r.get("coefficients", c.potential.coefficients);
        if (c.potential.kind != "constant") require(!r.has("value"), "/potential/value", "only allowed for constant");
        if (c.potential.kind != "polynomial")
            require(!r.has("coefficients"), "/potential/coefficients", "only allowed for polynomial");
        r.finish();
    }
    const std::string& kind = c.potential.kind;
    require(kind == "identity" || kind == "geometric" || kind == "constant" || kind == "polynomial", "/potential/kind",
            "unknown potential '" + kind + "'");
    if (kind == "polynomial")
        require(!c.potential.coefficients.empty(), "/potential/coefficients", "needs at least one coefficient");

    if (const auto* t = root.child("truncation")) {
        detail::Reader r(*t, "/truncation");
        r.get("n_max", c.truncation.n_max);
        r.get("depth", c.truncation.depth);
        r.get("nodes", c.truncation.nodes);
        r.get("checks", c.truncation.checks);
        r.finish();
    }
    require(c.truncation.n_max >= 4, "/truncation/n_max", "must be at least 4");
    require(c.truncation.depth == 0 || c.truncation.depth == 1, "/truncation/depth", "must be 0 or 1");
    require(c.truncation.nodes >= 4, "/truncation/nodes", "must be at least 4");
    require(c.truncation.checks >= 8, "/truncation/checks", "must be at least 8");

    if (const auto* t = root.child("tolerances")) {
        detail::Reader r(*t, "/tolerances");
        auto& x = c.tolerances;
        r.get("eigen_tol", x.eigen_tol);
        r.get("s_polish_tol", x.s_polish_tol);
        r.get("margin", x.margin);
        r.get("fd_step", x.fd_step);
        r.get("second_step", x.second_step);
        r.get("derivative_rtol", x.derivative_rtol);
        r.get("convexity_tol", x.convexity_tol);
        r.get("power_band", x.power_band);
        r.get("plateau_band", x.plateau_band);
        r.get("q_tol", x.q_tol);
        r.get("b_tol", x.b_tol);
        r.get("res_p_tol", x.res_p_tol);
        r.get("res_dq_tol", x.res_dq_tol);
        r.finish();
        const std::pair<const char*, double> pos[] = {
            {"eigen_tol", x.eigen_tol}, {"s_polish_tol", x.s_polish_tol}, {"fd_step", x.fd_step},
            {"second_step", x.second_step}, {"derivative_rtol", x.derivative_rtol}, {"q_tol", x.q_tol},
            {"b_tol", x.b_tol}, {"res_p_tol", x.res_p_tol}, {"res_dq_tol", x.res_dq_tol}};
        for (const auto& [k, v] : pos) require(v > 0, std::string("/tolerances/") + k, "must be positive");
        require(x.margin >= 0, "/tolerances/margin", "must be non-negative");
        require(x.power_band >= 0, "/tolerances/power_band", "must be non-negative");
        require(x.plateau_band >= 0, "/tolerances/plateau_band", "must be non-negative");
        require(x.convexity_tol >= 0, "/tolerances/convexity_tol", "must be non-negative");
    }

    if (const auto* o = root.child("output")) {
        detail::Reader r(*o, "/output");
        r.get("format", c.output.format);
        r.get("path", c.output.path);
        r.finish();
    }
    const std::string& fmt = c.output.format;
    require(fmt == "auto" || fmt == "json" || fmt == "csv", "/output/format", "must be auto, json or csv");

    if (const auto* o = root.child("cache")) {
        detail::Reader r(*o, "/cache");
        r.get("directory", c.cache.directory);
        r.get("enabled", c.cache.enabled);
        r.finish();
    }
    root.finish();
    return c;
}

inline RunConfig parse_config(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(detail::line_col(text, e.byte), "JSON syntax error");
    }
    return from_json(j);
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path, "cannot open config file");
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config(ss.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path + ":" + e.location(), e.message());
    }
}

inline std::string emit_config(const RunConfig& c) { return to_json(c).dump(2) + "\n"; }

// Canonical single-line form used for hashing.
inline std::string canonical_config(const RunConfig& c) { return to_json(c).dump(); }

inline MapModel build_map(const MapConfig& m) {
    if (m.builtin == "manneville_pomeau") return builtin_manneville_pomeau(m.beta);
    if (m.builtin == "farey_like") return builtin_farey_like();
    std::vector<RationalPowerBranch> specs;
    for (const auto& b : m.branches) {
        RationalPowerBranch s;
        s.domain = {b.lo, b.hi};
        s.a0 = b.a0;
        s.a1 = b.a1;
        s.c = b.c;
        s.x0 = b.x0;
        s.e = b.e;
        s.d0 = b.d0;
        s.d1 = b.d1;
        s.parabolic_point = b.parabolic_point;
        specs.push_back(s);
    }
    return custom_map("custom", specs, m.gamma);
}

inline PotentialSpec build_potential(const PotentialConfig& p, const MapModel& m) {
    if (p.kind == "identity") return identity_potential(m);
    if (p.kind == "geometric") return geometric_potential(m);
    if (p.kind == "constant") return constant_potential(m, p.value);
    return polynomial_potential(m, p.coefficients);
}

inline EngineSettings engine_settings(const RunConfig& c) {
    EngineSettings s;
    s.n_max = c.truncation.n_max;
    s.depth = c.truncation.depth;
    s.nodes = c.truncation.nodes;
    s.checks = c.truncation.checks;
    s.eigen_tol = c.tolerances.eigen_tol;
    s.s_polish_tol = c.tolerances.s_polish_tol;
    s.margin = c.tolerances.margin;
    s.fd_step = c.tolerances.fd_step;
    s.second_step = c.tolerances.second_step;
    s.derivative_rtol = c.tolerances.derivative_rtol;
    s.convexity_tol = c.tolerances.convexity_tol;
    s.power_band = c.tolerances.power_band;
    return s;
}

inline SpectrumSettings spectrum_settings(const RunConfig& c) {
    SpectrumSettings s;
    s.q_tol = c.tolerances.q_tol;
    s.b_tol = c.tolerances.b_tol;
    s.res_p_tol = c.tolerances.res_p_tol;
    s.res_dq_tol = c.tolerances.res_dq_tol;
    return s;
}

inline PlateauSettings plateau_settings(const RunConfig& c) { return {c.tolerances.plateau_band}; }

}  // namespace thermo

#endif
