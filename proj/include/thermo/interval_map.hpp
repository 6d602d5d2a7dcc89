#ifndef THERMO_INTERVAL_MAP_HPP
#define THERMO_INTERVAL_MAP_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "numerics.hpp"

namespace thermo {

enum class Monotonicity { Increasing, Decreasing };

struct BranchSpec {
    int index = 0;
    Interval domain;
    std::function<double(double)> forward;
    std::function<double(double)> derivative;
    std::function<double(double)> second_derivative;
    std::function<double(double)> inverse;
    // log|f'|, supplied separately so builtins can stay accurate near 1.
    std::function<double(double)> log_abs_derivative;
    bool parabolic = false;
    std::optional<double> fixed_point;
    Monotonicity direction = Monotonicity::Increasing;
};

struct MapModel {
    std::string name;
    std::vector<double> parameters;
    std::vector<BranchSpec> branches;
    double gamma = 1.0;
    double f1_constant = 1.0;
    double holder_exponent = 1.0;
    double renyi_bound = 0.0;

    int alphabet_size() const { return static_cast<int>(branches.size()); }
    bool is_parabolic(int i) const { return branches.at(i).parabolic; }
    std::vector<int> parabolic() const {
        std::vector<int> p;
        for (const auto& b : branches)
            if (b.parabolic) p.push_back(b.index);
        return p;
    }
    std::vector<int> hyperbolic() const {
        std::vector<int> h;
        for (const auto& b : branches)
            if (!b.parabolic) h.push_back(b.index);
        return h;
    }
    const BranchSpec& branch(int i) const { return branches.at(i); }
};

struct PotentialSpec {
    std::string name;
    std::vector<double> parameters;
    std::function<double(double x, int branch)> evaluate;
    std::map<int, double> parabolic_values;
    bool constant = false;

    double operator()(double x, int branch) const { return evaluate(x, branch); }
    double alpha(int i) const { return parabolic_values.at(i); }
};

// ---------------------------------------------------------------------------
// Potentials

inline std::map<int, double> parabolic_table(const MapModel& m, const std::function<double(double, int)>& phi) {
    std::map<int, double> t;
    for (const auto& b : m.branches)
        if (b.parabolic) t[b.index] = phi(*b.fixed_point, b.index);
    return t;
}

inline PotentialSpec identity_potential(const MapModel& m) {
    PotentialSpec p;
    p.name = "identity";
    p.evaluate = [](double x, int) { return x; };
    p.parabolic_values = parabolic_table(m, p.evaluate);
    return p;
}

inline PotentialSpec constant_potential(const MapModel& m, double c) {
    PotentialSpec p;
    p.name = "constant";
    p.parameters = {c};
    p.evaluate = [c](double, int) { return c; };
    p.parabolic_values = parabolic_table(m, p.evaluate);
    p.constant = true;
    return p;
}

inline PotentialSpec geometric_potential(const MapModel& m) {
    PotentialSpec p;
    p.name = "geometric";
    std::vector<std::function<double(double)>> logs;
    for (const auto& b : m.branches) logs.push_back(b.log_abs_derivative);
    p.evaluate = [logs](double x, int branch) { return logs.at(branch)(x); };
    p.parabolic_values = parabolic_table(m, p.evaluate);
    return p;
}

// coeffs[k] multiplies x^k.
inline PotentialSpec polynomial_potential(const MapModel& m, std::vector<double> coeffs) {
    if (coeffs.empty()) throw Error(ErrorKind::InvalidParameter, "polynomial potential needs coefficients");
    PotentialSpec p;
    p.name = "polynomial";
    p.parameters = coeffs;
    p.evaluate = [coeffs](double x, int) {
        double v = 0.0;
        for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) v = v * x + *it;
        return v;
    };
    p.parabolic_values = parabolic_table(m, p.evaluate);
    p.constant = std::all_of(coeffs.begin() + 1, coeffs.end(), [](double c) { return c == 0.0; });
    return p;
}

// ---------------------------------------------------------------------------
// Orbit sums along inverse branches

struct OrbitSums {
    double point = 0.0;
    double log_deriv = 0.0;
    double phi_sum = 0.0;
};

inline double checked_inverse(const BranchSpec& b, double y) {
    double x = b.inverse(y);
    if (!std::isfinite(x) || x < -1e-12 || x > 1.0 + 1e-12) {
        std::ostringstream os;
        os << "inverse branch " << b.index << " left [0,1] at y=" << y << " (value " << x << ")";
        throw Error(ErrorKind::Geometry, os.str());
    }
    return std::clamp(x, 0.0, 1.0);
}

// x = T_{l_0} o ... o T_{l_{m-1}}(y); sums run over the m orbit points x, f x, ...
inline OrbitSums pull_back(const MapModel& m, const PotentialSpec* phi, const std::vector<int>& letters, double y) {
    OrbitSums s;
    double x = y;
    CompensatedSum lf, ph;
    for (auto it = letters.rbegin(); it != letters.rend(); ++it) {
        const BranchSpec& b = m.branch(*it);
        x = checked_inverse(b, x);
        lf.add(b.log_abs_derivative(x));
        if (phi) ph.add((*phi)(x, *it));
    }
    s.point = x;
    s.log_deriv = lf.value();
    s.phi_sum = ph.value();
    return s;
}

// Visits the orbit data of j i^n k at base point y for n = 2..n_max, reusing the
// inner pullbacks z_l = T_i^l(y).
inline void family_sweep(const MapModel& m, const PotentialSpec* phi, int j, int i, double y, int n_max,
                         const std::function<void(int, const OrbitSums&)>& visit) {
    const BranchSpec& bi = m.branch(i);
    const BranchSpec& bj = m.branch(j);
    double z = y;
    CompensatedSum lf, ph;
    for (int n = 2; n <= n_max; ++n) {
        z = checked_inverse(bi, z);
        lf.add(bi.log_abs_derivative(z));
        if (phi) ph.add((*phi)(z, i));
        double x = checked_inverse(bj, z);
        OrbitSums s;
        s.point = x;
        s.log_deriv = lf.value() + bj.log_abs_derivative(x);
        s.phi_sum = ph.value() + (phi ? (*phi)(x, j) : 0.0);
        visit(n, s);
    }
}

// Hull of T_a T_b([0,1]).
inline Interval state_interval(const MapModel& m, int a, int b) {
    double u = checked_inverse(m.branch(a), checked_inverse(m.branch(b), 0.0));
    double v = checked_inverse(m.branch(a), checked_inverse(m.branch(b), 1.0));
    return Interval::hull(u, v);
}

// ---------------------------------------------------------------------------
// Builtin and custom models

namespace detail {

// Solves g(x) = y for increasing g on [lo, hi] by Newton inside a shrinking bracket.
inline double invert_increasing(const std::function<double(double)>& g, const std::function<double(double)>& dg,
                                double y, double lo, double hi, double x0) {
    double x = std::clamp(x0, lo, hi);
    for (int it = 0; it < 100; ++it) {
        double r = g(x) - y;
        if (r == 0.0) return x;
        if (r > 0)
            hi = x;
        else
            lo = x;
        double xn = x - r / dg(x);
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
        if (std::abs(xn - x) <= 1e-16 * std::max(std::abs(x), 1e-300) || hi - lo <= 1e-300) return xn;
        x = xn;
    }
    return x;
}

}  // namespace detail

inline double estimate_f1_constant(const MapModel& m, int cap);

// f(x) = x + x^{1+beta} mod 1
inline MapModel builtin_manneville_pomeau(double beta) {
    if (!(beta > 0) || !std::isfinite(beta))
        throw Error(ErrorKind::InvalidParameter, "Manneville-Pomeau beta must be positive");
    const double e = 1.0 + beta;
    auto g = [e](double x) { return x + std::pow(x, e); };
    auto dg = [e, beta](double x) { return 1.0 + e * std::pow(x, beta); };
    double xs = bisect([&](double x) { return g(x) - 1.0; }, 0.0, 1.0, 1e-14);

    MapModel m;
    m.name = "manneville_pomeau";
    m.parameters = {beta};
    m.gamma = 1.0 / beta;
    m.holder_exponent = 1.0;

    BranchSpec b0;
    b0.index = 0;
    b0.domain = {0.0, xs};
    b0.forward = g;
    b0.derivative = dg;
    b0.second_derivative = [e, beta](double x) { return e * beta * std::pow(x, beta - 1.0); };
    b0.log_abs_derivative = [e, beta](double x) { return std::log1p(e * std::pow(x, beta)); };
    b0.inverse = [g, dg, xs, beta](double y) {
        if (y <= 0.0) return 0.0;
        if (y >= 1.0) return xs;
        return detail::invert_increasing(g, dg, y, 0.0, xs, y / (1.0 + std::pow(y, beta)));
    };
    b0.parabolic = true;
    b0.fixed_point = 0.0;

    BranchSpec b1;
    b1.index = 1;
    b1.domain = {xs, 1.0};
    b1.forward = [g](double x) { return g(x) - 1.0; };
    b1.derivative = dg;
    b1.second_derivative = b0.second_derivative;
    b1.log_abs_derivative = [dg](double x) { return std::log(dg(x)); };
    b1.inverse = [g, dg, xs](double y) {
        if (y <= 0.0) return xs;
        if (y >= 1.0) return 1.0;
        return detail::invert_increasing(g, dg, y + 1.0, xs, 1.0, xs + y * (1.0 - xs));
    };
    m.branches = {b0, b1};
    m.f1_constant = estimate_f1_constant(m, 512);
    return m;
}

// f(x) = x/(1-x) on [0,1/2], (2x-1)/x on [1/2,1]
inline MapModel builtin_farey_like() {
    MapModel m;
    m.name = "farey_like";
    m.gamma = 1.0;
    m.holder_exponent = 1.0;

    BranchSpec b0;
    b0.index = 0;
    b0.domain = {0.0, 0.5};
    b0.forward = [](double x) { return x / (1.0 - x); };
    b0.derivative = [](double x) { return 1.0 / ((1.0 - x) * (1.0 - x)); };
    b0.second_derivative = [](double x) { return 2.0 / std::pow(1.0 - x, 3); };
    b0.log_abs_derivative = [](double x) { return -2.0 * std::log1p(-x); };
    b0.inverse = [](double y) { return y / (1.0 + y); };
    b0.parabolic = true;
    b0.fixed_point = 0.0;

    BranchSpec b1;
    b1.index = 1;
    b1.domain = {0.5, 1.0};
    b1.forward = [](double x) { return (2.0 * x - 1.0) / x; };
    b1.derivative = [](double x) { return 1.0 / (x * x); };
    b1.second_derivative = [](double x) { return -2.0 / (x * x * x); };
    b1.log_abs_derivative = [](double x) { return -2.0 * std::log(x); };
    b1.inverse = [](double y) { return 1.0 / (2.0 - y); };
    b1.parabolic = true;
    b1.fixed_point = 1.0;

    m.branches = {b0, b1};
    m.f1_constant = estimate_f1_constant(m, 512);
    return m;
}

// f(x) = (a0 + a1 x + c sgn(x-x0)|x-x0|^e) / (d0 + d1 x) on a closed domain.
struct RationalPowerBranch {
    Interval domain;
    double a0 = 0.0, a1 = 1.0, c = 0.0, x0 = 0.0, e = 1.0;
    double d0 = 1.0, d1 = 0.0;
    std::optional<double> parabolic_point;

    double power(double x) const {
        double u = x - x0;
        if (u == 0.0) return 0.0;
        return (u > 0 ? 1.0 : -1.0) * std::pow(std::abs(u), e);
    }
    double dpower(double x) const {
        double u = std::abs(x - x0);
        if (u == 0.0) return e == 1.0 ? 1.0 : (e > 1.0 ? 0.0 : std::numeric_limits<double>::infinity());
        return e * std::pow(u, e - 1.0);
    }
    double d2power(double x) const {
        double u = x - x0;
        if (u == 0.0) return 0.0;
        return (u > 0 ? 1.0 : -1.0) * e * (e - 1.0) * std::pow(std::abs(u), e - 2.0);
    }
    double value(double x) const { return (a0 + a1 * x + c * power(x)) / (d0 + d1 * x); }
    double deriv(double x) const {
        double nu = a0 + a1 * x + c * power(x), de = d0 + d1 * x;
        double dnu = a1 + c * dpower(x);
        return (dnu * de - nu * d1) / (de * de);
    }
    double deriv2(double x) const {
        double nu = a0 + a1 * x + c * power(x), de = d0 + d1 * x;
        double dnu = a1 + c * dpower(x), d2nu = c * d2power(x);
        // (N/D)'' = N''/D - 2N'D'/D^2 + 2N D'^2/D^3
        return d2nu / de - 2.0 * dnu * d1 / (de * de) + 2.0 * nu * d1 * d1 / (de * de * de);
    }
};

inline MapModel custom_map(const std::string& name, const std::vector<RationalPowerBranch>& specs, double gamma) {
    if (specs.size() < 2) throw Error(ErrorKind::InvalidParameter, "custom map needs at least two branches");
    if (!(gamma > 0)) throw Error(ErrorKind::InvalidParameter, "custom map gamma must be positive");
    MapModel m;
    m.name = name;
    m.gamma = gamma;
    m.holder_exponent = 1.0;
    for (std::size_t k = 0; k < specs.size(); ++k) {
        const RationalPowerBranch s = specs[k];
        if (!(s.domain.lo < s.domain.hi)) throw Error(ErrorKind::InvalidParameter, "custom branch with empty domain");
        BranchSpec b;
        b.index = static_cast<int>(k);
        b.domain = s.domain;
        b.forward = [s](double x) { return s.value(x); };
        b.derivative = [s](double x) { return s.deriv(x); };
        b.second_derivative = [s](double x) { return s.deriv2(x); };
        b.log_abs_derivative = [s](double x) { return std::log(std::abs(s.deriv(x))); };
        bool increasing = s.value(s.domain.hi) > s.value(s.domain.lo);
        b.direction = increasing ? Monotonicity::Increasing : Monotonicity::Decreasing;
        b.inverse = [s, increasing](double y) {
            auto g = [&](double x) { return increasing ? s.value(x) : -s.value(x); };
            auto dg = [&](double x) { return increasing ? s.deriv(x) : -s.deriv(x); };
            double target = increasing ? y : -y;
            double lo = s.domain.lo, hi = s.domain.hi;
            double glo = g(lo), ghi = g(hi);
            if (target <= glo) return lo;
            if (target >= ghi) return hi;
            double x0 = lo + (target - glo) / (ghi - glo) * (hi - lo);
            return detail::invert_increasing(g, dg, target, lo, hi, x0);
        };
        if (s.parabolic_point) {
            b.parabolic = true;
            b.fixed_point = *s.parabolic_point;
        }
        m.branches.push_back(b);
    }
    if (m.parabolic().empty()) throw Error(ErrorKind::InvalidParameter, "custom map needs a parabolic branch");
    m.f1_constant = estimate_f1_constant(m, 256);
    return m;
}

// ---------------------------------------------------------------------------
// Validation

struct SamplingPlan {
    int uniform_samples = 201;
    int refinement_levels = 40;
    double refinement_ratio = 0.5;
    int f1_max_return = 200;
    double slope_tolerance = 0.05;
    int f2_max_return = 200;
    double identity_tolerance = 1e-10;
    double roundtrip_tolerance = 1e-12;
};

struct AxiomCheck {
    std::string axiom;
    bool passed = false;
    std::string detail;
};

struct ValidationReport {
    std::vector<AxiomCheck> checks;
    double f1_slope = 0.0;
    double f1_constant = 0.0;
    double renyi_estimate = 0.0;
    double holder_seminorm = 0.0;
    std::map<int, double> min_derivative_location;

    bool all_passed() const {
        return std::all_of(checks.begin(), checks.end(), [](const AxiomCheck& c) { return c.passed; });
    }
    const AxiomCheck* find(const std::string& axiom) const {
        for (const auto& c : checks)
            if (c.axiom == axiom) return &c;
        return nullptr;
    }
};

namespace detail {

inline std::vector<double> branch_samples(const BranchSpec& b, const SamplingPlan& plan) {
    std::vector<double> xs;
    const Interval d = b.domain;
    for (int k = 0; k < plan.uniform_samples; ++k)
        xs.push_back(d.lo + d.width() * k / std::max(1, plan.uniform_samples - 1));
    if (b.parabolic) {
        double xp = *b.fixed_point;
        double scale = d.width();
        for (int k = 1; k <= plan.refinement_levels; ++k) {
            scale *= plan.refinement_ratio;
            if (xp + scale <= d.hi) xs.push_back(xp + scale);
            if (xp - scale >= d.lo) xs.push_back(xp - scale);
        }
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    return xs;
}

inline std::string at_x(const char* what, double x) {
    std::ostringstream os;
    os.precision(17);
    os << what << " at x=" << x;
    return os.str();
}

struct F1Scan {
    double slope = 0.0;
    double ratio_min = std::numeric_limits<double>::infinity();
    double ratio_max = 0.0;
    bool finite = true;
    double bad_x = 0.0;
};

// log F' against (1+gamma) log n on the families j i^n k.
inline F1Scan scan_f1(const MapModel& m, int cap) {
    F1Scan out;
    const int ne = m.alphabet_size();
    std::vector<double> logn, logd;
    auto note_ratio = [&](double lf, int n) {
        double r = lf - (1.0 + m.gamma) * std::log(static_cast<double>(n));
        out.ratio_min = std::min(out.ratio_min, r);
        out.ratio_max = std::max(out.ratio_max, r);
    };
    for (int i : m.parabolic()) {
        for (int j = 0; j < ne; ++j) {
            if (j == i) continue;
            for (int k = 0; k < ne; ++k) {
                if (k == i) continue;
                Interval base = state_interval(m, i, k);
                std::vector<std::vector<double>> per_y;
                for (double y : {base.lo, base.mid(), base.hi}) {
                    std::vector<double> lfs(cap + 1, 0.0);
                    OrbitSums one = pull_back(m, nullptr, {j}, y);
                    note_ratio(one.log_deriv, 1);
                    family_sweep(m, nullptr, j, i, y, cap, [&](int n, const OrbitSums& s) {
                        if (!std::isfinite(s.log_deriv)) {
                            out.finite = false;
                            out.bad_x = s.point;
                        }
                        lfs[n] = s.log_deriv;
                        note_ratio(s.log_deriv, n);
                    });
                    per_y.push_back(std::move(lfs));
                }
                for (int n = std::max(2, cap / 4); n <= cap; ++n) {
                    logn.push_back(std::log(static_cast<double>(n)));
                    logd.push_back(per_y[1][n]);
                }
            }
        }
    }
    double mx = 0, my = 0;
    for (std::size_t t = 0; t < logn.size(); ++t) {
        mx += logn[t];
        my += logd[t];
    }
    mx /= logn.size();
    my /= logn.size();
    double sxy = 0, sxx = 0;
    for (std::size_t t = 0; t < logn.size(); ++t) {
        sxy += (logn[t] - mx) * (logd[t] - my);
        sxx += (logn[t] - mx) * (logn[t] - mx);
    }
    out.slope = sxy / sxx;
    return out;
}

}  // namespace detail

inline double estimate_f1_constant(const MapModel& m, int cap) {
    detail::F1Scan s = detail::scan_f1(m, cap);
    return std::exp(std::max(s.ratio_max, -s.ratio_min));
}

inline ValidationReport validate_map(const MapModel& m, const SamplingPlan& plan = {},
                                     const PotentialSpec* potential = nullptr) {
    ValidationReport rep;
    const int ne = m.alphabet_size();

    {
        AxiomCheck c{"NEI1", true, ""};
        if (ne < 2) {
            c.passed = false;
            c.detail = "fewer than two branches";
        } else if (m.parabolic().empty()) {
            c.passed = false;
            c.detail = "no parabolic branch";
        }
        std::vector<Interval> doms;
        for (const auto& b : m.branches) {
            if (b.domain.lo < 0.0 || b.domain.hi > 1.0 || !(b.domain.lo < b.domain.hi)) {
                c.passed = false;
                c.detail = "branch " + std::to_string(b.index) + " domain not a subinterval of [0,1]";
            }
            doms.push_back(b.domain);
        }
        for (int a = 0; a < ne; ++a)
            for (int b = a + 1; b < ne; ++b)
                if (std::min(doms[a].hi, doms[b].hi) > std::max(doms[a].lo, doms[b].lo)) {
                    c.passed = false;
                    c.detail = "interiors of branches " + std::to_string(a) + " and " + std::to_string(b) + " overlap";
                }
        rep.checks.push_back(c);
    }

    {
        AxiomCheck c{"NEI2", true, ""};
        for (const auto& b : m.branches) {
            double u = b.forward(b.domain.lo), v = b.forward(b.domain.hi);
            if (!std::isfinite(u) || !std::isfinite(v)) {
                c.passed = false;
                c.detail = detail::at_x("non-finite forward value", std::isfinite(u) ? b.domain.hi : b.domain.lo);
                continue;
            }
            if (std::min(u, v) > plan.identity_tolerance || std::max(u, v) < 1.0 - plan.identity_tolerance) {
                c.passed = false;
                c.detail = "branch " + std::to_string(b.index) + " image does not contain (0,1)";
            }
            for (double x : detail::branch_samples(b, plan)) {
                double d = b.derivative(x);
                if (!std::isfinite(d) || d == 0.0 ||
                    ((d > 0) != (b.direction == Monotonicity::Increasing))) {
                    c.passed = false;
                    c.detail = detail::at_x("branch not strictly monotone in the declared direction", x);
                    break;
                }
            }
        }
        rep.checks.push_back(c);
    }

    {
        AxiomCheck c{"NEI3", true, ""};
        std::ostringstream os;
        for (const auto& b : m.branches) {
            auto xs = detail::branch_samples(b, plan);
            double min_abs = std::numeric_limits<double>::infinity(), argmin = 0.0;
            for (double x : xs) {
                double d = std::abs(b.derivative(x));
                if (!std::isfinite(d)) {
                    c.passed = false;
                    c.detail = detail::at_x("non-finite derivative", x);
                    continue;
                }
                if (d < min_abs) {
                    min_abs = d;
                    argmin = x;
                }
                if (b.parabolic && x != *b.fixed_point && !(b.log_abs_derivative(x) > 0.0)) {
                    c.passed = false;
                    c.detail = detail::at_x("|f'| <= 1 away from the parabolic point", x);
                }
            }
            if (b.parabolic) {
                double xp = *b.fixed_point;
                if (std::abs(b.forward(xp) - xp) > plan.identity_tolerance ||
                    std::abs(std::abs(b.derivative(xp)) - 1.0) > plan.identity_tolerance) {
                    c.passed = false;
                    c.detail = detail::at_x("parabolic point is not a neutral fixed point", xp);
                }
                rep.min_derivative_location[b.index] = argmin;
                os << "branch " << b.index << " parabolic, min|f'|=" << min_abs << " at " << argmin << "; ";
            } else {
                if (!(min_abs > 1.0)) {
                    c.passed = false;
                    c.detail = detail::at_x("hyperbolic branch with |f'| <= 1", argmin);
                }
                os << "branch " << b.index << " hyperbolic, c=" << min_abs << "; ";
            }
        }
        if (c.passed) c.detail = os.str();
        rep.checks.push_back(c);
    }

    {
        AxiomCheck c{"inverse", true, ""};
        double worst_fwd = 0.0, worst_back = 0.0;
        for (const auto& b : m.branches) {
            for (double x : detail::branch_samples(b, plan)) {
                double y = b.forward(x);
                double err = std::abs(b.inverse(std::clamp(y, 0.0, 1.0)) - x);
                if (!std::isfinite(err)) {
                    c.passed = false;
                    c.detail = detail::at_x("non-finite inverse", x);
                    continue;
                }
                worst_fwd = std::max(worst_fwd, err);
            }
            for (int k = 1; k < plan.uniform_samples; ++k) {
                double y = static_cast<double>(k) / plan.uniform_samples;
                worst_back = std::max(worst_back, std::abs(b.forward(b.inverse(y)) - y));
            }
        }
        if (worst_fwd > plan.identity_tolerance || worst_back > plan.roundtrip_tolerance) c.passed = false;
        if (c.detail.empty()) {
            std::ostringstream os;
            os << "max|T(f(x))-x|=" << worst_fwd << ", max|f(T(y))-y|=" << worst_back;
            c.detail = os.str();
        }
        rep.checks.push_back(c);
    }

    if (!rep.find("NEI1")->passed || !rep.find("NEI2")->passed || !rep.find("inverse")->passed) return rep;

    {
        AxiomCheck c{"F1", true, ""};
        try {
            detail::F1Scan s = detail::scan_f1(m, plan.f1_max_return);
            rep.f1_slope = s.slope;
            rep.f1_constant = std::exp(std::max(s.ratio_max, -s.ratio_min));
            std::ostringstream os;
            os << "slope=" << s.slope << " expected " << 1.0 + m.gamma << ", C'=" << rep.f1_constant;
            c.detail = os.str();
            if (!s.finite) {
                c.passed = false;
                c.detail = detail::at_x("non-finite log|F'|", s.bad_x);
            } else if (std::abs(s.slope - (1.0 + m.gamma)) > plan.slope_tolerance) {
                c.passed = false;
            }
        } catch (const Error& e) {
            c.passed = false;
            c.detail = e.what();
        }
        rep.checks.push_back(c);
    }

    {
        // |F''|/|F'|^2 = |sum_k (f''/f')(x_k) (f^k)'(x_0)| / F'(x_0)
        AxiomCheck c{"F2", true, ""};
        double max_low = 0.0, max_high = 0.0;
        const int cap = plan.f2_max_return;
        auto distortion = [&](const std::vector<int>& letters, double y) {
            std::vector<double> pts(letters.size());
            double x = y;
            for (int t = static_cast<int>(letters.size()) - 1; t >= 0; --t) {
                x = checked_inverse(m.branch(letters[t]), x);
                pts[t] = x;
            }
            double dk = 1.0, acc = 0.0;
            for (std::size_t t = 0; t < letters.size(); ++t) {
                const BranchSpec& b = m.branch(letters[t]);
                double d1 = b.derivative(pts[t]);
                acc += b.second_derivative(pts[t]) / d1 * dk;
                dk *= d1;
            }
            double v = std::abs(acc) / std::abs(dk);
            if (!std::isfinite(v)) throw Error(ErrorKind::Model, detail::at_x("non-finite F''/F'^2", pts[0]));
            return v;
        };
        try {
            for (int i : m.parabolic())
                for (int j = 0; j < ne; ++j) {
                    if (j == i) continue;
                    for (int k = 0; k < ne; ++k) {
                        if (k == i) continue;
                        Interval base = state_interval(m, i, k);
                        std::vector<int> letters{j};
                        for (int n = 1; n <= cap; ++n) {
                            if (n >= 2) letters.push_back(i);
                            for (double y : {base.lo, base.mid(), base.hi}) {
                                double v = distortion(letters, y);
                                if (n <= cap / 2)
                                    max_low = std::max(max_low, v);
                                else
                                    max_high = std::max(max_high, v);
                            }
                        }
                    }
                }
            rep.renyi_estimate = std::max(max_low, max_high);
            std::ostringstream os;
            os << "max|F''|/|F'|^2=" << rep.renyi_estimate << " (n<=" << cap / 2 << ": " << max_low
               << ", larger n: " << max_high << ")";
            c.detail = os.str();
            c.passed = max_high <= 2.0 * max_low + 1e-12;
        } catch (const Error& e) {
            c.passed = false;
            c.detail = e.what();
        }
        rep.checks.push_back(c);
    }

    if (potential) {
        // Oscillation of the induced potential over one- and two-symbol cylinders,
        // scaled by e^{beta k}; growth with n would signal a non-Holder potential.
        AxiomCheck c{"H", true, ""};
        const double beta = m.holder_exponent;
        double low = 0.0, high = 0.0;
        const int cap = plan.f1_max_return;
        try {
            for (int i : m.parabolic())
                for (int j = 0; j < ne; ++j) {
                    if (j == i) continue;
                    for (int k = 0; k < ne; ++k) {
                        if (k == i) continue;
                        Interval base = state_interval(m, i, k);
                        std::vector<Interval> osc(cap + 1, Interval{std::numeric_limits<double>::infinity(),
                                                                    -std::numeric_limits<double>::infinity()});
                        std::vector<Interval> osc_half = osc;
                        for (int t = 0; t <= 8; ++t) {
                            double y = base.lo + base.width() * t / 8.0;
                            family_sweep(m, potential, j, i, y, cap, [&](int n, const OrbitSums& s) {
                                osc[n].include(s.phi_sum);
                                if (t <= 4) osc_half[n].include(s.phi_sum);
                            });
                        }
                        for (int n = 2; n <= cap; ++n) {
                            double v = std::max(osc[n].width() * std::exp(beta), osc_half[n].width() * std::exp(2 * beta));
                            if (!std::isfinite(v)) throw Error(ErrorKind::Model, "non-finite induced potential");
                            if (n <= cap / 2)
                                low = std::max(low, v);
                            else
                                high = std::max(high, v);
                        }
                    }
                }
            rep.holder_seminorm = std::max(low, high);
            std::ostringstream os;
            os << "seminorm estimate=" << rep.holder_seminorm << " at beta=" << beta;
            c.detail = os.str();
            c.passed = high <= 2.0 * low + 1e-12;
        } catch (const Error& e) {
            c.passed = false;
            c.detail = e.what();
        }
        rep.checks.push_back(c);
    }
    return rep;
}

}  // namespace thermo

#endif
