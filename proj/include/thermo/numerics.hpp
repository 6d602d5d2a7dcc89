#ifndef THERMO_NUMERICS_HPP
#define THERMO_NUMERICS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>

namespace thermo {

enum class ErrorKind {
    InvalidParameter,
    Geometry,
    Numeric,
    Domain,
    Structural,
    Model,
    Range,
    Convergence,
    Config
};

inline const char* to_string(ErrorKind k) {
    switch (k) {
    case ErrorKind::InvalidParameter: return "invalid-parameter";
    case ErrorKind::Geometry: return "geometry";
    case ErrorKind::Numeric: return "numeric";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Structural: return "structural";
    case ErrorKind::Model: return "model";
    case ErrorKind::Range: return "range";
    case ErrorKind::Convergence: return "convergence";
    case ErrorKind::Config: return "config";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double width() const { return hi - lo; }
    double mid() const { return 0.5 * (lo + hi); }
    bool contains(double x, double slack = 0.0) const { return x >= lo - slack && x <= hi + slack; }
    bool contains(const Interval& o) const { return o.lo >= lo && o.hi <= hi; }
    bool empty() const { return !(lo <= hi); }

    static Interval point(double x) { return {x, x}; }
    static Interval hull(double a, double b) { return {std::min(a, b), std::max(a, b)}; }

    void include(double x) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    void include(const Interval& o) {
        lo = std::min(lo, o.lo);
        hi = std::max(hi, o.hi);
    }
    Interval widened(double w) const { return {lo - w, hi + w}; }
    Interval intersect(const Interval& o) const { return {std::max(lo, o.lo), std::min(hi, o.hi)}; }
};

inline bool operator==(const Interval& a, const Interval& b) { return a.lo == b.lo && a.hi == b.hi; }

// Neumaier compensated summation.
class CompensatedSum {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            c_ += (sum_ - t) + x;
        else
            c_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + c_; }

private:
    double sum_ = 0.0;
    double c_ = 0.0;
};

inline double log_sum_exp(const std::vector<double>& v) {
    if (v.empty()) return -std::numeric_limits<double>::infinity();
    double m = *std::max_element(v.begin(), v.end());
    if (!std::isfinite(m)) return m;
    CompensatedSum s;
    for (double x : v) s.add(std::exp(x - m));
    return m + std::log(s.value());
}

// Chebyshev-Lobatto nodes on [a,b], ascending, with barycentric weights.
struct ChebyshevGrid {
    Interval domain;
    std::vector<double> nodes;
    std::vector<double> weights;

    ChebyshevGrid() = default;
    ChebyshevGrid(Interval d, int n) : domain(d) {
        if (n < 2) throw Error(ErrorKind::InvalidParameter, "Chebyshev grid needs at least 2 nodes");
        nodes.resize(n);
        weights.resize(n);
        for (int j = 0; j < n; ++j) {
            double t = -std::cos(std::numbers::pi * j / (n - 1));
            nodes[j] = d.mid() + 0.5 * d.width() * t;
            weights[j] = (j % 2 == 0 ? 1.0 : -1.0) * ((j == 0 || j == n - 1) ? 0.5 : 1.0);
        }
        nodes.front() = d.lo;
        nodes.back() = d.hi;
    }

    int size() const { return static_cast<int>(nodes.size()); }

    // Row of interpolation weights: f(x) ~ sum_j row[j] f(node_j).
    std::vector<double> interpolation_row(double x) const {
        std::vector<double> row(nodes.size(), 0.0);
        for (std::size_t j = 0; j < nodes.size(); ++j) {
            if (x == nodes[j]) {
                row[j] = 1.0;
                return row;
            }
        }
        double denom = 0.0;
        for (std::size_t j = 0; j < nodes.size(); ++j) {
            row[j] = weights[j] / (x - nodes[j]);
            denom += row[j];
        }
        for (double& r : row) r /= denom;
        return row;
    }
};

// Root of a function with f(lo), f(hi) of opposite sign.
inline double bisect(const std::function<double(double)>& f, double lo, double hi, double tol, int max_iter = 200) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0) == (fhi > 0)) throw Error(ErrorKind::Numeric, "bisect: no sign change");
    for (int it = 0; it < max_iter && hi - lo > tol; ++it) {
        double m = 0.5 * (lo + hi);
        double fm = f(m);
        if (fm == 0.0) return m;
        if ((fm > 0) == (flo > 0)) {
            lo = m;
            flo = fm;
        } else {
            hi = m;
        }
    }
    return 0.5 * (lo + hi);
}

struct RootResult {
    double root = 0.0;
    Interval bracket;
    int iterations = 0;
    bool converged = false;
};

// Newton with a maintained sign-change bracket; falls back to bisection when a
// step leaves the bracket or the residual fails to halve. fdf returns (f, f').
inline RootResult safeguarded_newton(const std::function<std::pair<double, double>(double)>& fdf, double lo, double hi,
                                     double x0, double tol, int max_iter = 100) {
    double flo = fdf(lo).first;
    double fhi = fdf(hi).first;
    if (flo == 0.0) return {lo, {lo, lo}, 0, true};
    if (fhi == 0.0) return {hi, {hi, hi}, 0, true};
    if ((flo > 0) == (fhi > 0)) throw Error(ErrorKind::Numeric, "safeguarded_newton: no sign change");
    const bool lo_positive = flo > 0;
    RootResult r;
    double x = (x0 > lo && x0 < hi) ? x0 : 0.5 * (lo + hi);
    double prev_abs = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= max_iter; ++it) {
        auto [fx, dfx] = fdf(x);
        r.iterations = it;
        if (fx == 0.0) return {x, {x, x}, it, true};
        if ((fx > 0) == lo_positive)
            lo = x;
        else
            hi = x;
        double xn = x - fx / dfx;
        bool newton_ok = std::isfinite(xn) && xn > lo && xn < hi;
        if (newton_ok && std::abs(xn - x) < tol) {
            r.root = xn;
            r.bracket = {lo, hi};
            r.converged = true;
            return r;
        }
        if (hi - lo < tol) {
            r.root = 0.5 * (lo + hi);
            r.bracket = {lo, hi};
            r.converged = true;
            return r;
        }
        if (!newton_ok || std::abs(fx) > 0.5 * prev_abs) xn = 0.5 * (lo + hi);
        prev_abs = std::abs(fx);
        x = xn;
    }
    r.root = x;
    r.bracket = {lo, hi};
    return r;
}

// Tail of a parabolic family beyond return time n:
//   w_k = (k/n)^(-p) exp(r (k - n) + drift g(k/n)),  g(u) = (1 - u^(1-kappa)) / (kappa - 1)  (log u at kappa = 1)
// g captures the slowly converging part of the potential sum along the block.
struct TailModel {
    int n = 1;
    double p = 0.0;
    double r = 0.0;
    double drift = 0.0;
    double kappa = 1.0;
};

struct TailSums {
    double t0 = 0.0;    // sum w
    double t1 = 0.0;    // sum k w
    double t2 = 0.0;    // sum k^2 w
    double tlog = 0.0;  // sum log(k/n) w
    double tg = 0.0;    // sum g(k/n) w

    bool finite() const { return std::isfinite(t0); }
    double mean_k() const { return t1 / t0; }
    double mean_log() const { return tlog / t0; }
    double mean_g() const { return tg / t0; }
};

namespace detail {

inline double drift_shape(double u, double kappa) {
    if (std::abs(kappa - 1.0) < 1e-12) return std::log(u);
    return -std::expm1((1.0 - kappa) * std::log(u)) / (kappa - 1.0);
}

inline double tail_log_weight(const TailModel& t, double x) {
    double u = x / t.n;
    return -t.p * std::log(u) + t.r * (x - t.n) + (t.drift != 0.0 ? t.drift * drift_shape(u, t.kappa) : 0.0);
}

// Whether sum_k k^m w_k converges (m = 0, 1, 2); the log moment follows m = 0 up to
// a logarithm, which matters only at the edge handled by the power comparison.
inline bool tail_moment_finite(const TailModel& t, int m) {
    if (t.r < 0) return true;
    if (t.r > 0) return false;
    double p = t.p;
    if (t.drift != 0.0) {
        if (std::abs(t.kappa - 1.0) < 1e-12)
            p -= t.drift;
        else if (t.kappa < 1.0)
            return t.drift < 0.0;
    }
    return p - m > 1.0;
}

}  // namespace detail

// Direct summation over n < k <= n + direct_terms, then an Euler-Maclaurin
// remainder whose integral is taken in the variable log(x/K).
inline TailSums tail_sums(const TailModel& t, int direct_terms = 4096) {
    const double inf = std::numeric_limits<double>::infinity();
    if (t.n < 1) throw Error(ErrorKind::InvalidParameter, "tail_sums: n must be positive");
    TailSums out;
    if (!detail::tail_moment_finite(t, 0)) {
        out.t0 = out.t1 = out.t2 = out.tlog = out.tg = inf;
        return out;
    }
    const double nn = static_cast<double>(t.n);
    CompensatedSum s0, s1, s2, sl, sg;
    const int k_end = t.n + direct_terms;
    bool exhausted = false;
    for (int k = t.n + 1; k <= k_end; ++k) {
        double x = static_cast<double>(k);
        double w = std::exp(detail::tail_log_weight(t, x));
        s0.add(w);
        s1.add(w * x);
        s2.add(w * x * x);
        sl.add(w * std::log(x / nn));
        sg.add(w * detail::drift_shape(x / nn, t.kappa));
        if (t.r < 0 && w * x * x < 1e-300) {
            exhausted = true;
            break;
        }
    }
    out.t0 = s0.value();
    out.t1 = s1.value();
    out.t2 = s2.value();
    out.tlog = sl.value();
    out.tg = sg.value();
    if (exhausted) return out;

    // sum_{k > K} g(k) = int_K^inf g - g(K)/2 - g'(K)/12
    const double big_k = static_cast<double>(k_end);
    auto moment = [&](int which, double x) {
        double w = std::exp(detail::tail_log_weight(t, x));
        switch (which) {
        case 0: return w;
        case 1: return w * x;
        case 2: return w * x * x;
        case 3: return w * std::log(x / nn);
        default: return w * detail::drift_shape(x / nn, t.kappa);
        }
    };
    auto remainder = [&](int which) {
        int m = which <= 2 ? which : 0;
        if (!detail::tail_moment_finite(t, m)) return inf;
        auto integrand = [&](double u) {
            double x = big_k * std::exp(u);
            if (!std::isfinite(x)) return 0.0;
            double v = moment(which, x) * x;
            return std::isfinite(v) ? v : 0.0;
        };
        boost::math::quadrature::exp_sinh<double> integrator;
        double integral;
        try {
            integral = integrator.integrate(integrand, 0.0, inf, 1e-12);
        } catch (const std::exception&) {
            return inf;  // the sum exceeds the double range
        }
        double h = 1e-3 * big_k;
        double deriv = (moment(which, big_k + h) - moment(which, big_k - h)) / (2.0 * h);
        return integral - 0.5 * moment(which, big_k) - deriv / 12.0;
    };
    out.t0 += remainder(0);
    out.t1 += remainder(1);
    out.t2 += remainder(2);
    out.tlog += remainder(3);
    out.tg += remainder(4);
    return out;
}

// Shifted power iteration for the Perron root of an operator with a dominant
// positive eigenvalue; the shift handles imprimitive (periodic) structure.
struct PerronResult {
    double value = 0.0;
    std::vector<double> vector;
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

inline PerronResult perron_iteration(const std::function<void(const std::vector<double>&, std::vector<double>&)>& apply,
                                     std::size_t n, double tol, int max_iter,
                                     const std::vector<double>* start = nullptr) {
    PerronResult res;
    std::vector<double> v(n, 1.0);
    if (start && start->size() == n) v = *start;
    auto normalize = [](std::vector<double>& x) {
        double s = 0.0;
        for (double a : x) s += a * a;
        s = std::sqrt(s);
        if (!(s > 0) || !std::isfinite(s)) return false;
        for (double& a : x) a /= s;
        return true;
    };
    if (!normalize(v)) throw Error(ErrorKind::Numeric, "perron_iteration: degenerate start vector");
    std::vector<double> w(n);
    double lambda = 0.0;
    for (int it = 1; it <= max_iter; ++it) {
        apply(v, w);
        double vw = 0.0;
        for (std::size_t i = 0; i < n; ++i) vw += v[i] * w[i];
        lambda = vw;
        double r2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double d = w[i] - lambda * v[i];
            r2 += d * d;
        }
        res.residual = std::sqrt(r2);
        res.iterations = it;
        if (res.residual <= tol * std::abs(lambda) && lambda > 0) {
            res.converged = true;
            break;
        }
        double shift = std::max(lambda, 0.0);
        for (std::size_t i = 0; i < n; ++i) w[i] += shift * v[i];
        v.swap(w);
        if (!normalize(v)) throw Error(ErrorKind::Numeric, "perron_iteration: iterate vanished or overflowed");
    }
    double sum = 0.0;
    for (double a : v) sum += a;
    if (sum < 0)
        for (double& a : v) a = -a;
    res.value = lambda;
    res.vector = std::move(v);
    return res;
}

}  // namespace thermo

#endif
