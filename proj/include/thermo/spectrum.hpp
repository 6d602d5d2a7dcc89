#ifndef THERMO_SPECTRUM_HPP
#define THERMO_SPECTRUM_HPP

#include <algorithm>
#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "gibbs_measures.hpp"
#include "numerics.hpp"
#include "pressure_engine.hpp"

namespace thermo {

// ---------------------------------------------------------------------------
// Bowen dimension

struct BowenResult {
    double delta = 0.0;
    Interval bracket;           // enclosure of the root from the pressure bracket
    Interval search;            // b-interval that was searched
    PressureBracket pressure;   // induced pressure bracket at delta
    double lambda_induced = 0.0;
    int iterations = 0;
};

struct BowenSettings {
    double lower_margin = 1e-3;  // above the critical exponent 1/(1+gamma)
    double upper = 1.05;
    double tol = 1e-12;
};

inline BowenResult bowen_dimension(const PressureEngine& engine, const BowenSettings& bs = {}) {
    const bool parabolic = !engine.operator_data().tails.empty();
    const double lo = parabolic ? 1.0 / (1.0 + engine.gamma()) + bs.lower_margin : 0.0;
    const double hi = bs.upper;
    auto fdf = [&](double b) {
        PointEval ev = engine.evaluate({b, 0.0, 0.0});
        return std::make_pair(ev.pressure, -ev.mean_logd);
    };
    double flo = fdf(lo).first, fhi = fdf(hi).first;
    if (!(flo > 0) || !(fhi < 0))
        throw Error(ErrorKind::Model, "bowen_dimension: no sign change of P(b,0,0) on [" + std::to_string(lo) + ", " +
                                          std::to_string(hi) + "]");
    RootResult root = safeguarded_newton(fdf, lo, hi, std::min(1.0, 0.5 * (lo + hi) + 0.25), bs.tol, 200);
    if (!root.converged) throw Error(ErrorKind::Convergence, "bowen_dimension: root finding did not converge");
    BowenResult out;
    out.delta = root.root;
    out.iterations = root.iterations;
    out.search = {lo, hi};
    PointEval ev = engine.evaluate({out.delta, 0.0, 0.0});
    out.lambda_induced = ev.mean_logd;
    out.pressure = engine.bracket_from({out.delta, 0.0, 0.0}, ev);
    // P decreases with slope -lambda, so the true root sits at delta + P/lambda
    out.bracket = {out.delta + out.pressure.lower / out.lambda_induced, out.delta + out.pressure.upper / out.lambda_induced};
    out.bracket.include(out.delta);
    return out;
}

// ---------------------------------------------------------------------------
// Plateau

enum class PlateauCase { NoMaxMeasure, MaxMeasure };

inline const char* to_string(PlateauCase c) { return c == PlateauCase::MaxMeasure ? "max-measure" : "no-max-measure"; }

struct PlateauInfo {
    double delta = 0.0;
    double gamma = 0.0;
    double threshold = 0.0;  // 2/delta - 1
    int gamma_vs_threshold = 0;
    bool boundary = false;
    PlateauCase plateau_case = PlateauCase::NoMaxMeasure;
    double alpha_P_min = 0.0, alpha_P_max = 0.0;
    std::optional<double> mu_delta_phi;
    std::optional<MeasureStats> mu_delta;
    Interval A;
    Interval A_no_max, A_max;  // both candidates, reported in the boundary band
    std::string note;
};

struct PlateauSettings {
    double band = 0.02;  // half-width of the inconclusive band around 2/delta - 1
};

inline PlateauInfo plateau(const PressureEngine& engine, double delta, const PlateauSettings& ps = {}) {
    PlateauInfo info;
    info.delta = delta;
    info.gamma = engine.gamma();
    info.threshold = 2.0 / delta - 1.0;
    const double diff = info.gamma - info.threshold;
    info.gamma_vs_threshold = diff > 0 ? 1 : (diff < 0 ? -1 : 0);
    info.boundary = std::abs(diff) <= ps.band;
    info.alpha_P_min = engine.alpha_p_min();
    info.alpha_P_max = engine.alpha_p_max();
    info.A_no_max = {info.alpha_P_min, info.alpha_P_max};
    info.A_max = info.A_no_max;

    const bool want_measure = diff > 0 || info.boundary;
    if (want_measure) {
        try {
            MeasureStats st = measure_stats(engine, Query{delta, 0.0, 0.0});
            if (std::isfinite(st.mean_R)) {
                info.mu_delta_phi = st.projected.alpha;
                info.mu_delta = st;
                info.A_max.include(st.projected.alpha);
            } else {
                info.note = "mean return time of the delta-measure is infinite";
            }
        } catch (const Error& e) {
            info.note = e.what();
        }
    }
    if (info.boundary) {
        info.plateau_case = info.mu_delta_phi ? PlateauCase::MaxMeasure : PlateauCase::NoMaxMeasure;
        info.A = info.A_no_max;
        info.A.include(info.A_max.lo);
        info.A.include(info.A_max.hi);
    } else if (diff > 0) {
        if (!info.mu_delta_phi) throw Error(ErrorKind::Numeric, "plateau: delta-measure statistics unavailable: " + info.note);
        info.plateau_case = PlateauCase::MaxMeasure;
        info.A = info.A_max;
    } else {
        info.plateau_case = PlateauCase::NoMaxMeasure;
        info.A = info.A_no_max;
    }
    return info;
}

// ---------------------------------------------------------------------------
// Admissible range

namespace detail {

struct RatioEdge {
    int from = 0, to = 0;
    double num = 0.0;  // Birkhoff sum along the word
    double den = 1.0;  // return time
};

// Maximum mean weight over cycles (Karp). Returns -inf for an acyclic graph.
inline double karp_max_mean(int n, const std::vector<RatioEdge>& edges, double lambda) {
    const double ninf = -std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> D(n + 1, std::vector<double>(n, ninf));
    double best = ninf;
    // all vertices as sources at once
    for (int v = 0; v < n; ++v) D[0][v] = 0.0;
    for (int k = 1; k <= n; ++k)
        for (const auto& e : edges)
            if (D[k - 1][e.from] > ninf) D[k][e.to] = std::max(D[k][e.to], D[k - 1][e.from] + e.num - lambda * e.den);
    for (int v = 0; v < n; ++v) {
        if (D[n][v] == ninf) continue;
        double worst = std::numeric_limits<double>::infinity();
        for (int k = 0; k < n; ++k)
            if (D[k][v] > ninf) worst = std::min(worst, (D[n][v] - D[k][v]) / (n - k));
        best = std::max(best, worst);
    }
    return best;
}

// max over cycles of sum(num)/sum(den), by bisection on the ratio.
inline double max_cycle_ratio(int n, const std::vector<RatioEdge>& edges, double tol = 1e-13) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& e : edges) {
        lo = std::min(lo, e.num / e.den);
        hi = std::max(hi, e.num / e.den);
    }
    if (edges.empty()) return std::numeric_limits<double>::quiet_NaN();
    for (int it = 0; it < 200 && hi - lo > tol * (1.0 + std::abs(hi)); ++it) {
        double mid = 0.5 * (lo + hi);
        if (karp_max_mean(n, edges, mid) >= 0)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

}  // namespace detail

struct AlphaRange {
    double min_est = 0.0, max_est = 0.0;
    double cycle_min = 0.0, cycle_max = 0.0;
    double alpha_P_min = 0.0, alpha_P_max = 0.0;
};

inline AlphaRange alpha_range(const PressureEngine& engine) {
    const OperatorData& op = engine.operator_data();
    const int n = static_cast<int>(op.states.size());
    std::vector<detail::RatioEdge> hi_edges, lo_edges;
    for (const auto& s : op.symbols) {
        // inner values: the smallest sum for the max, the largest for the min
        hi_edges.push_back({s.src, s.dst, s.phi_bar_bracket.lo, static_cast<double>(s.r)});
        lo_edges.push_back({s.src, s.dst, -s.phi_bar_bracket.hi, static_cast<double>(s.r)});
    }
    AlphaRange out;
    out.cycle_max = detail::max_cycle_ratio(n, hi_edges);
    out.cycle_min = -detail::max_cycle_ratio(n, lo_edges);
    if (!engine.parabolic_values().empty()) {
        out.alpha_P_min = engine.alpha_p_min();
        out.alpha_P_max = engine.alpha_p_max();
        out.min_est = std::min(out.cycle_min, out.alpha_P_min);
        out.max_est = std::max(out.cycle_max, out.alpha_P_max);
    } else {
        out.alpha_P_min = out.alpha_P_max = std::numeric_limits<double>::quiet_NaN();
        out.min_est = out.cycle_min;
        out.max_est = out.cycle_max;
    }
    if (out.min_est > out.max_est) out.min_est = out.max_est = 0.5 * (out.min_est + out.max_est);
    return out;
}

// ---------------------------------------------------------------------------
// Birkhoff spectrum

struct SpectrumSettings {
    double plateau_band = 1e-9;  // tolerance band around the plateau endpoints
    double q_cap = 80.0;
    double q_step = 0.25;        // initial bracket expansion step in q
    double q_tol = 1e-10;        // residual target |alpha - mu(phi)|
    double b_tol = 1e-10;
    double res_p_tol = 1e-5;
    double res_dq_tol = 1e-4;
    double lower_b = 0.0;
};

struct SpectrumPoint {
    double alpha = 0.0;
    double b_alpha = 0.0;
    std::optional<double> q_alpha;
    bool on_plateau = false;
    bool band = false;
    std::optional<MeasureStats> stats;
    double res_p = 0.0;   // |p_alpha(b, q)|
    double res_dq = 0.0;  // |d/dq p_alpha(b, q)|
    double legendre = 0.0;  // |b - h/lambda|
    int outer_iterations = 0;
    int inner_evaluations = 0;
    std::string error;
    bool ok() const { return error.empty(); }
};

class SpectrumSolver {
public:
    SpectrumSolver(const PressureEngine& engine, PlateauInfo info, SpectrumSettings ss = {})
        : engine_(engine), info_(std::move(info)), ss_(ss) {}

    const PlateauInfo& plateau_info() const { return info_; }

    // mu_{b,q}(phi) together with p(b,q); Dirac limits outside N.
    struct Eval {
        double p = 0.0;
        double mu_phi = 0.0;
        double lambda = 0.0;
        bool in_N = false;
    };

    Eval eval(double b, double q) const {
        ++evaluations_;
        DomainFlag d = engine_.solve_p(b, q);
        Eval e;
        e.p = d.p_value;
        e.in_N = d.in_N;
        if (d.in_N) {
            PointEval ev = engine_.evaluate({b, q, d.p_value});
            e.mu_phi = ev.mean_phi / ev.mean_r;
            e.lambda = ev.mean_logd / ev.mean_r;
        } else {
            // p = Lambda_q is attained by the Dirac mass at the parabolic point maximizing -q alpha_i
            const auto& al = engine_.parabolic_values();
            double best = al.front();
            for (double a : al)
                if (-q * a > -q * best) best = a;
            e.mu_phi = best;
            e.lambda = 0.0;
        }
        return e;
    }

    // Root in q of alpha - mu_{b,q}(phi), increasing in q.
    double inner_q(double alpha, double b, double q0, Eval* at = nullptr) const {
        auto h = [&](double q) { return alpha - eval(b, q).mu_phi; };
        double qa = q0, ha = h(qa);
        if (ha == 0.0) {
            if (at) *at = eval(b, qa);
            return qa;
        }
        double step = ss_.q_step;
        double qb = qa, hb = ha;
        while (true) {
            qb = ha < 0 ? qa + step : qa - step;
            if (std::abs(qb) > ss_.q_cap)
                throw Error(ErrorKind::Range, "birkhoff_point: q(alpha) not bracketed within |q| <= " + std::to_string(ss_.q_cap));
            hb = h(qb);
            if ((hb > 0) != (ha > 0) || hb == 0.0) break;
            qa = qb;
            ha = hb;
            step *= 2.0;
        }
        double lo = std::min(qa, qb), hi = std::max(qa, qb);
        double flo = qa < qb ? ha : hb, fhi = qa < qb ? hb : ha;
        std::uintmax_t max_iter = 100;
        const double qtol = ss_.q_tol;
        auto tol = [qtol](double a, double c) { return std::abs(c - a) <= 1e-13 * (1.0 + std::abs(a)); };
        double root;
        if (fhi == 0.0) {
            root = hi;
        } else {
            // stop early once the residual is below target
            double best_q = lo, best_r = std::abs(flo);
            auto hh = [&](double q) {
                double v = h(q);
                if (std::abs(v) < best_r) {
                    best_r = std::abs(v);
                    best_q = q;
                }
                if (std::abs(v) < qtol) throw Found{q};
                return v;
            };
            try {
                auto r = boost::math::tools::toms748_solve(hh, lo, hi, flo, fhi, tol, max_iter);
                root = 0.5 * (r.first + r.second);
                if (best_r < std::abs(h(root))) root = best_q;
            } catch (const Found& f) {
                root = f.q;
            }
        }
        if (at) *at = eval(b, root);
        return root;
    }

    SpectrumPoint point(double alpha, std::optional<double> b_start = {}, std::optional<double> q_start = {}) const {
        SpectrumPoint sp;
        sp.alpha = alpha;
        evaluations_ = 0;
        const Interval& A = info_.A;
        const double delta = info_.delta;
        if (alpha >= A.lo - ss_.plateau_band && alpha <= A.hi + ss_.plateau_band) {
            sp.on_plateau = true;
            sp.band = alpha < A.lo + ss_.plateau_band || alpha > A.hi - ss_.plateau_band;
            sp.b_alpha = delta;
            if (!sp.band) return sp;
        }
        try {
            SpectrumPoint off = off_plateau(alpha, b_start, q_start);
            if (sp.band) {
                // inside the band report the larger b
                if (off.b_alpha > sp.b_alpha) {
                    off.band = true;
                    return off;
                }
                return sp;
            }
            return off;
        } catch (const Error& e) {
            if (sp.on_plateau) return sp;
            sp.error = std::string(to_string(e.kind())) + ": " + e.what();
            sp.b_alpha = std::numeric_limits<double>::quiet_NaN();
            return sp;
        }
    }

    std::vector<SpectrumPoint> curve(const std::vector<double>& alphas) const {
        std::vector<SpectrumPoint> out;
        std::optional<double> b0, q0;
        for (double a : alphas) {
            SpectrumPoint sp = point(a, b0, q0);
            if (sp.ok() && sp.q_alpha) {
                b0 = sp.b_alpha;
                q0 = sp.q_alpha;
            }
            out.push_back(std::move(sp));
        }
        return out;
    }

private:
    struct Found {
        double q;
    };

    SpectrumPoint off_plateau(double alpha, std::optional<double> b_start, std::optional<double> q_start) const {
        const double delta = info_.delta;
        const bool right = alpha > info_.A.hi;
        double q_guess = q_start.value_or(right ? -0.5 : 0.5);
        if (right ? q_guess >= 0 : q_guess <= 0) q_guess = right ? -0.5 : 0.5;
        double q_last = q_guess;
        Eval e_last;
        auto g = [&](double b) {
            Eval e;
            double q = inner_q(alpha, b, q_last, &e);
            q_last = q;
            e_last = e;
            return std::make_pair(e.p + q * alpha, -e.lambda);
        };
        // g decreases in b; g(delta) < 0 off the plateau, g(b) > 0 for small b
        double hi = delta;
        double ghi = g(hi).first;
        if (!(ghi < 0)) throw Error(ErrorKind::Convergence, "birkhoff_point: p_alpha minimum at delta is not negative");
        double lo = b_start ? std::min(*b_start, delta) : delta;
        double step = 0.05;
        double glo = ghi;
        while (true) {
            lo = std::max(ss_.lower_b, lo - step);
            glo = g(lo).first;
            if (glo > 0) break;
            hi = lo;
            ghi = glo;
            if (lo <= ss_.lower_b) throw Error(ErrorKind::Range, "birkhoff_point: no positive p_alpha minimum above b = 0");
            step *= 2.0;
        }
        RootResult root = safeguarded_newton(g, lo, hi, b_start ? std::clamp(*b_start, lo, hi) : 0.5 * (lo + hi), ss_.b_tol, 100);
        if (!root.converged) throw Error(ErrorKind::Convergence, "birkhoff_point: outer iteration did not converge");

        SpectrumPoint sp;
        sp.alpha = alpha;
        sp.b_alpha = root.root;
        auto [gv, gd] = g(sp.b_alpha);
        (void)gd;
        sp.q_alpha = q_last;
        sp.outer_iterations = root.iterations;
        sp.res_p = std::abs(gv);
        sp.res_dq = std::abs(alpha - e_last.mu_phi);
        if (e_last.in_N) {
            sp.stats = measure_stats(engine_, Query{sp.b_alpha, q_last, e_last.p});
            sp.legendre = std::abs(sp.b_alpha - sp.stats->projected.dim);
        }
        sp.inner_evaluations = evaluations_;
        if (sp.res_p > ss_.res_p_tol || sp.res_dq > ss_.res_dq_tol)
            throw Error(ErrorKind::Convergence, "birkhoff_point: residuals |p_alpha| = " + std::to_string(sp.res_p) +
                                                    ", |dq p_alpha| = " + std::to_string(sp.res_dq));
        return sp;
    }

    const PressureEngine& engine_;
    PlateauInfo info_;
    SpectrumSettings ss_;
    mutable int evaluations_ = 0;
};

struct CurveDiagnostics {
    bool increasing_left = true;
    bool decreasing_right = true;
    bool below_delta = true;
    int failures = 0;
};

inline CurveDiagnostics curve_diagnostics(const std::vector<SpectrumPoint>& pts, const PlateauInfo& info, double tol = 1e-4) {
    CurveDiagnostics d;
    const SpectrumPoint* prev = nullptr;
    for (const auto& p : pts) {
        if (!p.ok()) {
            ++d.failures;
            prev = nullptr;
            continue;
        }
        if (p.b_alpha > info.delta + tol) d.below_delta = false;
        if (prev) {
            if (p.alpha < info.A.lo && !(p.b_alpha > prev->b_alpha - tol)) d.increasing_left = false;
            if (prev->alpha > info.A.hi && !(p.b_alpha < prev->b_alpha + tol)) d.decreasing_right = false;
        }
        prev = &p;
    }
    return d;
}

// ---------------------------------------------------------------------------
// Plateau endpoints through one-sided q-derivatives at (delta, 0)

struct EndpointCheck {
    OneSidedDerivatives derivs;
    double expected_right = 0.0;  // -min A
    double expected_left = 0.0;   // -max A
    double right_error = 0.0, left_error = 0.0;
    bool passed = false;
    bool inconclusive = false;
};

inline EndpointCheck plateau_endpoint_check(const PressureEngine& engine, const PlateauInfo& info, double tol = 2e-2) {
    EndpointCheck c;
    c.derivs = engine.one_sided_q_derivatives(info.delta, 0.0);
    c.expected_right = -info.A.lo;
    c.expected_left = -info.A.hi;
    c.right_error = std::abs(c.derivs.right - c.expected_right);
    c.left_error = std::abs(c.derivs.left - c.expected_left);
    c.inconclusive = c.derivs.inconclusive;
    c.passed = c.right_error <= tol && c.left_error <= tol;
    return c;
}

}  // namespace thermo

#endif
