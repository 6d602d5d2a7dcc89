#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include "thermo/config.hpp"
#include "thermo/crosscheck.hpp"
#include "thermo/gibbs_measures.hpp"
#include "thermo/oracle.hpp"
#include "thermo/pressure_engine.hpp"
#include "thermo/spectrum.hpp"
#include "thermo/version.hpp"

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;
using namespace thermo;

namespace {

constexpr int exit_config = 2;
constexpr int exit_numeric = 3;

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    EVP_DigestUpdate(ctx, data.data(), data.size());
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

std::vector<double> parse_grid(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    auto bad = [&] { return ConfigError("--grid", "expected lo:hi:n, got '" + text + "'"); };
    if (parts.size() != 3) throw bad();
    double lo = 0, hi = 0;
    long n = 0;
    auto rd = [&](const std::string& s, auto& v) {
        auto r = std::from_chars(s.data(), s.data() + s.size(), v);
        if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw bad();
    };
    rd(parts[0], lo);
    rd(parts[1], hi);
    rd(parts[2], n);
    if (n < 1 || !(lo <= hi)) throw bad();
    std::vector<double> g;
    for (long k = 0; k < n; ++k) g.push_back(n == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) / (n - 1));
    return g;
}

ojson interval(const Interval& iv) { return ojson::array({iv.lo, iv.hi}); }

struct Context {
    RunConfig cfg;
    std::string config_hash;

    MapModel map() const { return build_map(cfg.map); }

    PressureEngine engine() const {
        MapModel m = map();
        return PressureEngine(m, build_potential(cfg.potential, m), engine_settings(cfg));
    }

    ojson meta() const {
        ojson tol = ojson::parse(to_json(cfg)["tolerances"].dump());
        ojson tr = ojson::parse(to_json(cfg)["truncation"].dump());
        return ojson{{"engine_version", engine_version}, {"config_hash", config_hash}, {"truncation", tr}, {"tolerances", tol}};
    }

    std::string format(const char* fallback) const {
        return cfg.output.format == "auto" ? fallback : cfg.output.format;
    }
};

struct Outcome {
    std::string main;
    std::string summary;
    int code = 0;
};

std::string line(const ojson& j) { return j.dump() + "\n"; }

ojson stats_json(const MeasureStats& st) {
    return ojson{{"mean_R", st.mean_R},
                 {"mean_R2", st.mean_R2},
                 {"mean_phi_bar", st.mean_phi_bar},
                 {"mean_phi_bar_bracket", interval(st.mean_phi_bar_bracket)},
                 {"lambda_induced", st.lambda_induced},
                 {"lambda_induced_bracket", interval(st.lambda_induced_bracket)},
                 {"entropy_induced", st.entropy_induced},
                 {"chain_entropy", st.chain_entropy},
                 {"tail_mass", st.tail_mass},
                 {"tail_R_share", st.tail_R_share},
                 {"tail_rate", st.tail_rate},
                 {"tail_warning", st.tail_warning},
                 {"projected",
                  {{"lambda", st.projected.lambda},
                   {"alpha", st.projected.alpha},
                   {"entropy", st.projected.entropy},
                   {"dim", st.projected.dim}}}};
}

ojson plateau_json(const PlateauInfo& p) {
    ojson j{{"delta", p.delta},
            {"gamma", p.gamma},
            {"threshold", p.threshold},
            {"gamma_vs_threshold", p.gamma_vs_threshold},
            {"boundary", p.boundary},
            {"case", to_string(p.plateau_case)},
            {"alpha_P_min", p.alpha_P_min},
            {"alpha_P_max", p.alpha_P_max},
            {"A", interval(p.A)}};
    if (p.mu_delta_phi) j["mu_delta_phi"] = *p.mu_delta_phi;
    if (p.boundary) j["candidates"] = {{"no_max_measure", interval(p.A_no_max)}, {"max_measure", interval(p.A_max)}};
    if (!p.note.empty()) j["note"] = p.note;
    return j;
}

// ---------------------------------------------------------------------------
// Commands

Outcome cmd_validate(const Context& ctx) {
    MapModel m = ctx.map();
    PotentialSpec phi = build_potential(ctx.cfg.potential, m);
    ValidationReport rep = validate_map(m, {}, &phi);
    ojson checks = ojson::array();
    for (const auto& c : rep.checks) checks.push_back({{"axiom", c.axiom}, {"passed", c.passed}, {"detail", c.detail}});
    ojson j{{"command", "validate"},
            {"meta", ctx.meta()},
            {"map", m.name},
            {"gamma", m.gamma},
            {"passed", rep.all_passed()},
            {"f1_slope", rep.f1_slope},
            {"f1_constant", rep.f1_constant},
            {"renyi_estimate", rep.renyi_estimate},
            {"holder_seminorm", rep.holder_seminorm},
            {"checks", checks}};
    return {line(j), "", rep.all_passed() ? 0 : exit_config};
}

struct PressureArgs {
    std::optional<double> b, s;
    double q = 0.0;
    bool solve_p = false;
    std::string grid_b, grid_q;
};

Outcome cmd_pressure(const Context& ctx, const PressureArgs& a) {
    PressureEngine eng = ctx.engine();
    if (!a.grid_b.empty() || !a.grid_q.empty()) {
        if (a.grid_b.empty() && !a.b) throw ConfigError("--b", "grid mode needs --grid-b or --b");
        std::vector<double> bs = a.grid_b.empty() ? std::vector<double>{*a.b} : parse_grid(a.grid_b);
        std::vector<double> qs = a.grid_q.empty() ? std::vector<double>{a.q} : parse_grid(a.grid_q);
        const bool csv = ctx.format("csv") == "csv";
        std::string out = csv ? "b,q,p,dp_db,dp_dq,d2p_dq2\n" : "";
        for (double b : bs)
            for (double q : qs) {
                DomainFlag d = eng.solve_p(b, q);
                double db = 0, dq = 0, d2 = 0;
                if (d.in_N) {
                    PointEval ev = eng.evaluate({b, q, d.p_value});
                    db = -ev.mean_logd / ev.mean_r;
                    dq = -ev.mean_phi / ev.mean_r;
                    d2 = eng.second_derivative_q(b, q).d2q;
                } else {
                    // p = Lambda_q: the Dirac measure of the dominant parabolic point
                    double best = -std::numeric_limits<double>::infinity();
                    for (double al : eng.parabolic_values())
                        if (-q * al > best) {
                            best = -q * al;
                            dq = -al;
                        }
                }
                if (csv) {
                    out += num(b) + "," + num(q) + "," + num(d.p_value) + "," + num(db) + "," + num(dq) + "," + num(d2) + "\n";
                } else {
                    out += line(ojson{{"b", b}, {"q", q}, {"p", d.p_value}, {"in_N", d.in_N}, {"dp_db", db}, {"dp_dq", dq},
                                      {"d2p_dq2", d2}, {"residual", d.residual}, {"config_hash", ctx.config_hash}});
                }
            }
        return {out, "", 0};
    }
    if (!a.b) throw ConfigError("--b", "required");
    ojson j{{"command", "pressure"}, {"meta", ctx.meta()}, {"b", *a.b}, {"q", a.q}};
    if (a.s && !a.solve_p) {
        Query qy{*a.b, a.q, *a.s};
        FinReport fin = eng.is_finite(qy);
        j["s"] = *a.s;
        j["fin"] = to_string(fin.verdict);
        if (fin.verdict == FinVerdict::Divergent) {
            j["detail"] = fin.detail;
            return {line(j), "", 0};
        }
        PressureBracket br = eng.induced_pressure(qy);
        j["pressure"] = br.point;
        j["bracket"] = ojson::array({br.lower, br.upper});
        j["tail"] = br.tail_bound;
        j["consistent"] = br.consistent;
        j["truncation"] = {{"n_max", br.n_max}, {"depth", br.depth}};
        j["residual"] = br.width();
        return {line(j), "", 0};
    }
    DomainFlag d = eng.solve_p(*a.b, a.q);
    j["p"] = d.p_value;
    j["p_bracket"] = interval(d.p_bracket);
    j["in_N"] = d.in_N;
    j["lambda_q"] = d.lambda_q;
    j["margin"] = d.margin;
    j["certified"] = d.certified;
    j["bracket"] = ojson::array({d.bracket.lower, d.bracket.upper});
    j["tail"] = d.bracket.tail_bound;
    j["truncation"] = {{"n_max", d.bracket.n_max}, {"depth", d.bracket.depth}};
    j["residual"] = d.residual;
    return {line(j), "", 0};
}

struct GibbsArgs {
    double b = 0.0, q = 0.0;
    std::optional<double> s;
};

Outcome cmd_gibbs(const Context& ctx, const GibbsArgs& a) {
    PressureEngine eng = ctx.engine();
    double s = a.s ? *a.s : eng.solve_p(a.b, a.q).p_value;
    GibbsApprox g = gibbs_approx(eng, {a.b, a.q, s});
    if (ctx.format("json") == "csv") {
        const OperatorData& op = eng.operator_data();
        std::string out = "symbol,word,r,src,dst,mass,tail_factor\n";
        for (std::size_t k = 0; k < op.symbols.size(); ++k) {
            const auto& sy = op.symbols[k];
            std::string label = eng.alphabet() ? eng.alphabet()->word(sy.word).label() : std::to_string(sy.word);
            out += std::to_string(k) + "," + label + "," + std::to_string(sy.r) + "," + std::to_string(sy.src) + "," +
                   std::to_string(sy.dst) + "," + num(g.stationary[k]) + "," + num(g.tail_factor[k]) + "\n";
        }
        return {out, "", 0};
    }
    MeasureStats st = measure_stats(eng, g);
    ojson j{{"command", "gibbs"},
            {"meta", ctx.meta()},
            {"b", a.b},
            {"q", a.q},
            {"s", s},
            {"perron_value", g.perron_value},
            {"gibbs_constant", g.gibbs_constant},
            {"gibbs_samples", g.gibbs_samples},
            {"residuals", {{"stationarity", g.stationarity_residual}, {"row_sum", g.row_sum_residual}}},
            {"stats", stats_json(st)}};
    return {line(j), "", 0};
}

Outcome cmd_dimension(const Context& ctx) {
    PressureEngine eng = ctx.engine();
    BowenResult bd = bowen_dimension(eng);
    PlateauInfo info = plateau(eng, bd.delta, plateau_settings(ctx.cfg));
    ojson j{{"command", "dimension"},
            {"meta", ctx.meta()},
            {"delta", bd.delta},
            {"bracket", interval(bd.bracket)},
            {"search", interval(bd.search)},
            {"pressure_bracket", ojson::array({bd.pressure.lower, bd.pressure.upper})},
            {"lambda_induced", bd.lambda_induced},
            {"iterations", bd.iterations},
            {"plateau", plateau_json(info)}};
    return {line(j), "", 0};
}

struct SpectrumArgs {
    std::optional<double> alpha;
    std::string grid;
};

Outcome cmd_spectrum(const Context& ctx, const SpectrumArgs& a) {
    std::vector<double> alphas = a.alpha ? std::vector<double>{*a.alpha} : parse_grid(a.grid);
    PressureEngine eng = ctx.engine();
    BowenResult bd = bowen_dimension(eng);
    PlateauInfo info = plateau(eng, bd.delta, plateau_settings(ctx.cfg));
    AlphaRange range = alpha_range(eng);
    SpectrumSolver solver(eng, info, spectrum_settings(ctx.cfg));
    std::vector<SpectrumPoint> pts = solver.curve(alphas);
    CurveDiagnostics diag = curve_diagnostics(pts, info);

    ojson errors = ojson::array();
    int failed = 0;
    for (const auto& p : pts)
        if (!p.ok()) {
            ++failed;
            errors.push_back({{"alpha", p.alpha}, {"error", p.error}});
        }
    ojson summary{{"command", "spectrum"},
                  {"meta", ctx.meta()},
                  {"delta", bd.delta},
                  {"delta_bracket", interval(bd.bracket)},
                  {"plateau", plateau_json(info)},
                  {"alpha_range", {{"min_est", range.min_est}, {"max_est", range.max_est}}},
                  {"diagnostics",
                   {{"increasing_left", diag.increasing_left},
                    {"decreasing_right", diag.decreasing_right},
                    {"below_delta", diag.below_delta},
                    {"failures", diag.failures}}},
                  {"errors", errors}};

    auto flags = [](const SpectrumPoint& p) {
        std::string f;
        auto add = [&](const char* s) { f += (f.empty() ? "" : "|") + std::string(s); };
        if (p.on_plateau) add("plateau");
        if (p.band) add("band");
        if (p.stats && p.stats->tail_warning) add("tail_warning");
        if (!p.ok()) add("error");
        return f;
    };
    const double nan = std::numeric_limits<double>::quiet_NaN();
    Outcome out;
    out.code = failed ? exit_numeric : 0;
    if (ctx.format("csv") == "csv") {
        out.main = "alpha,b,q,h,lambda,mu_phi,res_p,res_dq,flags\n";
        for (const auto& p : pts) {
            double h = p.stats ? p.stats->projected.entropy : nan;
            double lam = p.stats ? p.stats->projected.lambda : nan;
            double mu = p.stats ? p.stats->projected.alpha : (p.on_plateau ? p.alpha : nan);
            out.main += num(p.alpha) + "," + num(p.b_alpha) + "," + num(p.q_alpha.value_or(nan)) + "," + num(h) + "," +
                        num(lam) + "," + num(mu) + "," + num(p.res_p) + "," + num(p.res_dq) + "," + flags(p) + "\n";
        }
        out.summary = summary.dump(2) + "\n";
    } else {
        ojson rows = ojson::array();
        for (const auto& p : pts) {
            ojson r{{"alpha", p.alpha}, {"b", p.b_alpha}, {"flags", flags(p)}, {"res_p", p.res_p}, {"res_dq", p.res_dq}};
            if (p.q_alpha) r["q"] = *p.q_alpha;
            if (p.stats) {
                r["legendre"] = p.legendre;
                r["stats"] = stats_json(*p.stats);
            }
            if (!p.ok()) r["error"] = p.error;
            rows.push_back(r);
        }
        summary["points"] = rows;
        out.main = line(summary);
    }
    return out;
}

struct OracleArgs {
    int k = 2;
    double c = 1.0, gamma = 1.0;
    std::optional<double> b, s;
    double q = 0.0;
    int max_len = 3;
    int points = 2000, iter = 20000, bins = 50;
    std::uint64_t seed = 12345;
    int length = 10;
    double alpha = 0.6;
};

Outcome cmd_oracle(const Context& ctx, const std::string& which, const OracleArgs& a) {
    ojson j{{"command", "oracle " + which}, {"meta", ctx.meta()}};
    const int n_max = ctx.cfg.truncation.n_max;
    if (which == "linearized" || which == "bowen") {
        oracle::LinearizedModel lm{a.k, a.c, a.gamma, 0};
        PressureEngine eng(build_linearized_operator(a.k, n_max, std::log(a.c), a.gamma),
                           std::vector<double>(a.k, 0.0), a.gamma, engine_settings(ctx.cfg));
        j["model"] = {{"k_per_level", a.k}, {"scale", a.c}, {"gamma", a.gamma}};
        if (which == "linearized") {
            if (!a.b || !a.s) throw ConfigError("--b/--s", "required");
            double o = oracle::linearized_pressure(lm, *a.b, *a.s);
            PressureBracket br = eng.induced_pressure({*a.b, 0.0, *a.s});
            double mid = 0.5 * (br.lower + br.upper);
            j["oracle"] = o;
            j["bracket"] = ojson::array({br.lower, br.upper});
            j["contained"] = br.contains(o);
            j["relative_deviation"] = std::abs(mid - o) / std::max(std::abs(o), 1e-300);
            return {line(j), "", br.contains(o) ? 0 : exit_numeric};
        }
        double o = oracle::linearized_bowen_root(lm);
        BowenResult bd = bowen_dimension(eng);
        j["oracle"] = o;
        j["delta"] = bd.delta;
        j["bracket"] = interval(bd.bracket);
        j["difference"] = bd.delta - o;
        return {line(j), "", 0};
    }
    PressureEngine eng = ctx.engine();
    if (which == "subshift") {
        if (!a.b || !a.s) throw ConfigError("--b/--s", "required");
        Query qy{*a.b, a.q, *a.s};
        oracle::SubshiftThermo th = oracle::finite_subshift_thermo(sup_weight_graph(eng.operator_data(), qy));
        Interval cb = coarse_bracket(eng.operator_data(), qy, eng.operator_settings());
        j["oracle_pressure"] = th.pressure;
        j["oracle_entropy"] = th.entropy;
        j["engine_lower"] = cb.lo;
        j["difference"] = th.pressure - cb.lo;
        return {line(j), "", 0};
    }
    if (which == "cycles") {
        if (a.max_len < 1 || a.max_len > 6) throw ConfigError("--max-len", "must be in 1..6");
        const OperatorData& op = eng.operator_data();
        const int n = static_cast<int>(op.states.size());
        oracle::CycleExtremes hi = oracle::exhaustive_cycle_means(n, cycle_edges(op, true), a.max_len);
        oracle::CycleExtremes lo = oracle::exhaustive_cycle_means(n, cycle_edges(op, false), a.max_len);
        AlphaRange r = alpha_range(eng);
        j["exhaustive"] = {{"min", lo.min}, {"max", hi.max}, {"cycles", hi.cycles}, {"max_len", a.max_len}};
        j["alpha_range"] = {{"cycle_min", r.cycle_min}, {"cycle_max", r.cycle_max}, {"min_est", r.min_est}, {"max_est", r.max_est}};
        return {line(j), "", 0};
    }
    if (which == "histogram") {
        MapModel m = ctx.map();
        oracle::Histogram h =
            oracle::orbit_birkhoff_histogram(m, build_potential(ctx.cfg.potential, m), a.points, a.iter, a.bins, 0.0, 1.0, a.seed);
        j["counts"] = h.counts;
        j["range"] = ojson::array({h.lo, h.hi});
        j["mean"] = h.mean;
        j["mode_bin"] = interval(h.mode_bin());
        return {line(j), "", 0};
    }
    // shift: non-induced cylinder shift against the engine's spectrum point
    MapModel m = ctx.map();
    oracle::CylinderShift cs = oracle::cylinder_shift(m, build_potential(ctx.cfg.potential, m), a.length);
    BowenResult bd = bowen_dimension(eng);
    PlateauInfo info = plateau(eng, bd.delta, plateau_settings(ctx.cfg));
    SpectrumSolver solver(eng, info, spectrum_settings(ctx.cfg));
    SpectrumPoint sp = solver.point(a.alpha);
    const bool right = a.alpha > info.A.hi;
    oracle::SubshiftSpectrumPoint os =
        oracle::subshift_spectrum_point(cs.n_states, cs.edges, a.alpha, right ? -5.0 : 0.0, right ? 0.0 : 5.0);
    j["alpha"] = a.alpha;
    j["length"] = a.length;
    j["oracle"] = {{"b", os.b}, {"q", os.q}};
    j["engine"] = {{"b", sp.b_alpha}, {"q", sp.q_alpha ? ojson(*sp.q_alpha) : ojson()}};
    j["difference"] = sp.b_alpha - os.b;
    return {line(j), "", sp.ok() ? 0 : exit_numeric};
}

// ---------------------------------------------------------------------------
// Output and cache

void write_file(const fs::path& p, const std::string& bytes) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    fs::path tmp = p;
    tmp += ".tmp";
    {
        std::ofstream o(tmp, std::ios::binary);
        o << bytes;
        if (!o) throw std::runtime_error("cannot write " + tmp.string());
    }
    fs::rename(tmp, p);
}

std::optional<std::string> read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void emit(const Outcome& o, const std::string& out_path, const std::string& summary_path) {
    if (out_path.empty()) {
        std::fwrite(o.main.data(), 1, o.main.size(), stdout);
        std::fflush(stdout);
    } else {
        write_file(out_path, o.main);
    }
    if (!summary_path.empty() && !o.summary.empty()) write_file(summary_path, o.summary);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Thermodynamic formalism of parabolic interval maps"};
    app.require_subcommand(1);
    std::string config_path, format, output, cache_dir, summary_path;
    std::optional<int> n_max, depth;
    bool no_cache = false;
    app.add_option("-c,--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--n-max", n_max, "override truncation.n_max");
    app.add_option("--depth", depth, "override truncation.depth");
    app.add_option("--format", format, "override output.format")->check(CLI::IsMember({"auto", "json", "csv"}));
    app.add_option("-o,--output", output, "write the main output to a file");
    app.add_option("--cache-dir", cache_dir, "cache directory (overrides THERMO_CACHE_DIR and the config)");
    app.add_flag("--no-cache", no_cache, "neither read nor write the result cache");

    std::string command, args_key;

    auto* validate = app.add_subcommand("validate", "check the map axioms");

    PressureArgs pa;
    auto* pressure = app.add_subcommand("pressure", "induced pressure bracket or p(b,q)");
    pressure->add_option("--b", pa.b);
    pressure->add_option("--q", pa.q);
    auto* s_opt = pressure->add_option("--s", pa.s);
    pressure->add_flag("--solve-p", pa.solve_p)->excludes(s_opt);
    pressure->add_option("--grid-b", pa.grid_b, "lo:hi:n");
    pressure->add_option("--grid-q", pa.grid_q, "lo:hi:n");

    GibbsArgs ga;
    auto* gibbs = app.add_subcommand("gibbs", "Gibbs measure statistics");
    gibbs->add_option("--b", ga.b)->required();
    gibbs->add_option("--q", ga.q);
    gibbs->add_option("--s", ga.s, "defaults to p(b,q)");

    auto* dimension = app.add_subcommand("dimension", "Bowen dimension and plateau");

    SpectrumArgs sa;
    auto* spectrum = app.add_subcommand("spectrum", "Birkhoff spectrum points");
    auto* a_opt = spectrum->add_option("--alpha", sa.alpha);
    auto* g_opt = spectrum->add_option("--grid", sa.grid, "lo:hi:n");
    a_opt->excludes(g_opt);
    spectrum->add_option("--summary", summary_path, "JSON summary file for CSV output");

    OracleArgs oa;
    auto* oracle_cmd = app.add_subcommand("oracle", "independent reference computations");
    oracle_cmd->require_subcommand(1);
    auto* o_lin = oracle_cmd->add_subcommand("linearized", "closed-form pressure of the linearized shift");
    auto* o_bow = oracle_cmd->add_subcommand("bowen", "zeta root of the linearized shift");
    for (auto* sc : {o_lin, o_bow}) {
        sc->add_option("--k", oa.k);
        sc->add_option("--c", oa.c);
        sc->add_option("--gamma", oa.gamma);
    }
    o_lin->add_option("--b", oa.b)->required();
    o_lin->add_option("--s", oa.s)->required();
    auto* o_sub = oracle_cmd->add_subcommand("subshift", "dense Perron data of the truncated shift");
    o_sub->add_option("--b", oa.b)->required();
    o_sub->add_option("--q", oa.q);
    o_sub->add_option("--s", oa.s)->required();
    auto* o_cyc = oracle_cmd->add_subcommand("cycles", "exhaustive cycle means");
    o_cyc->add_option("--max-len", oa.max_len);
    auto* o_his = oracle_cmd->add_subcommand("histogram", "orbit Birkhoff averages");
    o_his->add_option("--points", oa.points);
    o_his->add_option("--iter", oa.iter);
    o_his->add_option("--bins", oa.bins);
    o_his->add_option("--seed", oa.seed);
    auto* o_shf = oracle_cmd->add_subcommand("shift", "spectrum point on a finite cylinder shift");
    o_shf->add_option("--length", oa.length);
    o_shf->add_option("--alpha", oa.alpha)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : exit_config;
    }

    try {
        Context ctx;
        if (!config_path.empty()) ctx.cfg = load_config(config_path);
        if (n_max) ctx.cfg.truncation.n_max = *n_max;
        if (depth) ctx.cfg.truncation.depth = *depth;
        if (!format.empty()) ctx.cfg.output.format = format;
        if (!output.empty()) ctx.cfg.output.path = output;
        ctx.cfg = parse_config(emit_config(ctx.cfg));  // re-validate after overrides
        ojson computational = ojson::parse(to_json(ctx.cfg).dump());
        computational.erase("output");
        computational.erase("cache");
        ctx.config_hash = sha256_hex(computational.dump() + "\n" + engine_version);

        std::function<Outcome()> run;
        ojson args;
        if (*validate) {
            command = "validate";
            run = [&] { return cmd_validate(ctx); };
        } else if (*pressure) {
            command = "pressure";
            args = {{"b", pa.b ? ojson(*pa.b) : ojson()}, {"q", pa.q}, {"s", pa.s ? ojson(*pa.s) : ojson()},
                    {"solve_p", pa.solve_p}, {"grid_b", pa.grid_b}, {"grid_q", pa.grid_q}};
            run = [&] { return cmd_pressure(ctx, pa); };
        } else if (*gibbs) {
            command = "gibbs";
            args = {{"b", ga.b}, {"q", ga.q}, {"s", ga.s ? ojson(*ga.s) : ojson()}};
            run = [&] { return cmd_gibbs(ctx, ga); };
        } else if (*dimension) {
            command = "dimension";
            run = [&] { return cmd_dimension(ctx); };
        } else if (*spectrum) {
            command = "spectrum";
            if (!sa.alpha && sa.grid.empty()) throw ConfigError("spectrum", "one of --alpha or --grid is required");
            args = {{"alpha", sa.alpha ? ojson(*sa.alpha) : ojson()}, {"grid", sa.grid}};
            run = [&] { return cmd_spectrum(ctx, sa); };
        } else {
            std::string which;
            for (auto* sc : {o_lin, o_bow, o_sub, o_cyc, o_his, o_shf})
                if (*sc) which = sc->get_name();
            command = "oracle " + which;
            args = {{"k", oa.k}, {"c", oa.c}, {"gamma", oa.gamma}, {"b", oa.b ? ojson(*oa.b) : ojson()}, {"q", oa.q},
                    {"s", oa.s ? ojson(*oa.s) : ojson()}, {"max_len", oa.max_len}, {"points", oa.points},
                    {"iter", oa.iter}, {"bins", oa.bins}, {"seed", oa.seed}, {"length", oa.length}, {"alpha", oa.alpha}};
            run = [&, which] { return cmd_oracle(ctx, which, oa); };
        }

        const char* env_dir = std::getenv("THERMO_CACHE_DIR");
        std::string dir = !cache_dir.empty() ? cache_dir : (env_dir && *env_dir ? env_dir : ctx.cfg.cache.directory);
        const bool use_cache = !no_cache && ctx.cfg.cache.enabled;
        const std::string key =
            sha256_hex(ctx.config_hash + "\n" + command + "\n" + args.dump() + "\n" + ctx.format("auto"));
        const fs::path main_file = fs::path(dir) / (key + ".out");
        const fs::path summary_file = fs::path(dir) / (key + ".summary");

        if (use_cache) {
            if (auto hit = read_file(main_file)) {
                Outcome o{*hit, read_file(summary_file).value_or(""), 0};
                emit(o, ctx.cfg.output.path, summary_path);
                std::cerr << "cache hit " << key << "\n";
                return 0;
            }
        }
        Outcome o = run();
        emit(o, ctx.cfg.output.path, summary_path);
        if (use_cache && o.code == 0) {
            write_file(main_file, o.main);
            if (!o.summary.empty()) write_file(summary_file, o.summary);
        }
        return o.code;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.location() << ": " << e.message() << "\n";
        return exit_config;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.kind() == ErrorKind::InvalidParameter ? exit_config : exit_numeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_numeric;
    }
}
