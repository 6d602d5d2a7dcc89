#ifndef THERMO_ORACLE_HPP
#define THERMO_ORACLE_HPP

// Brute-force reference computations. Nothing here touches the transfer
// operator, the tail model or the pressure engine.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <boost/math/special_functions/zeta.hpp>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "interval_map.hpp"
#include "numerics.hpp"

namespace thermo::oracle {

// ---------------------------------------------------------------------------
// Linearized full shift: K symbols per level n, weight (c n^{1+gamma})^{-b} e^{-s n}

struct LinearizedModel {
    int k_per_level = 2;
    double scale = 1.0;  // c
    double gamma = 1.0;
    int level_cap = 0;   // 0 for the infinite shift
};

inline double linearized_pressure(const LinearizedModel& m, double b, double s) {
    const double p = b * (1.0 + m.gamma);
    if (m.level_cap <= 0 && !(s > 0) && !(s == 0.0 && p > 1.0))
        throw Error(ErrorKind::Domain, "linearized_pressure: series diverges");
    const double log_c = std::log(m.scale);
    double total;
    if (m.level_cap <= 0 && s == 0.0) {
        total = boost::math::zeta(p);
    } else {
        CompensatedSum acc;
        const long cap = m.level_cap > 0 ? m.level_cap : 100000000L;
        long n = 1;
        for (; n <= cap; ++n) {
            double t = std::exp(-p * std::log(static_cast<double>(n)) - s * static_cast<double>(n));
            acc.add(t);
            if (m.level_cap <= 0 && t < 1e-18 * acc.value() && s * static_cast<double>(n) > 40.0) break;
        }
        if (m.level_cap <= 0 && n > cap) throw Error(ErrorKind::Convergence, "linearized_pressure: series too slow");
        total = acc.value();
    }
    return std::log(static_cast<double>(m.k_per_level)) - b * log_c + std::log(total);
}

// Root in b of K c^{-b} zeta(b(1+gamma)) = 1 by bisection.
inline double linearized_bowen_root(const LinearizedModel& m, double tol = 1e-14) {
    auto f = [&](double b) { return linearized_pressure(m, b, 0.0); };
    double lo = 1.0 / (1.0 + m.gamma) + 1e-9, hi = lo + 1.0;
    while (f(hi) > 0) {
        hi += 2.0 * (hi - lo);
        if (hi > 1e6) throw Error(ErrorKind::Convergence, "linearized_bowen_root: no sign change");
    }
    if (!(f(lo) > 0)) throw Error(ErrorKind::Domain, "linearized_bowen_root: pressure not positive near the critical exponent");
    return bisect(f, lo, hi, tol);
}

// ---------------------------------------------------------------------------
// Finite subshifts of finite type

// Symbol graph: symbol k may be followed by each listed successor, with the log
// weight of k depending on that successor.
struct FiniteGraph {
    int n = 0;
    std::vector<std::vector<std::pair<int, double>>> out;
};

struct SubshiftThermo {
    double pressure = 0.0;
    std::vector<double> stationary;
    Eigen::MatrixXd transition;
    double entropy = 0.0;
};

inline SubshiftThermo finite_subshift_thermo(const FiniteGraph& g) {
    if (g.n <= 0) throw Error(ErrorKind::Structural, "finite_subshift_thermo: empty graph");
    double scale = -std::numeric_limits<double>::infinity();
    for (const auto& row : g.out)
        for (const auto& [j, lw] : row) scale = std::max(scale, lw);
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(g.n, g.n);
    for (int i = 0; i < g.n; ++i)
        for (const auto& [j, lw] : g.out[i]) M(i, j) += std::exp(lw - scale);

    // irreducibility through reachability from symbol 0 both ways
    auto reach = [&](bool forward) {
        std::vector<char> seen(g.n, 0);
        std::vector<int> stack{0};
        seen[0] = 1;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (int u = 0; u < g.n; ++u) {
                double e = forward ? M(v, u) : M(u, v);
                if (e > 0 && !seen[u]) {
                    seen[u] = 1;
                    stack.push_back(u);
                }
            }
        }
        return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
    };
    if (!reach(true) || !reach(false)) throw Error(ErrorKind::Structural, "finite_subshift_thermo: reducible graph");

    auto perron = [](const Eigen::MatrixXd& A, double& root) {
        Eigen::EigenSolver<Eigen::MatrixXd> es(A);
        int best = 0;
        for (int k = 1; k < A.rows(); ++k)
            if (es.eigenvalues()[k].real() > es.eigenvalues()[best].real()) best = k;
        root = es.eigenvalues()[best].real();
        Eigen::VectorXd v = es.eigenvectors().col(best).real();
        if (v.sum() < 0) v = -v;
        return v;
    };
    double rho = 0.0, rho_t = 0.0;
    Eigen::VectorXd r = perron(M, rho);
    Eigen::VectorXd l = perron(M.transpose(), rho_t);
    if (!(rho > 0)) throw Error(ErrorKind::Numeric, "finite_subshift_thermo: non-positive Perron root");
    SubshiftThermo out;
    out.pressure = scale + std::log(rho);
    out.transition = Eigen::MatrixXd::Zero(g.n, g.n);
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j)
            if (M(i, j) > 0) out.transition(i, j) = M(i, j) * r(j) / (rho * r(i));
    Eigen::VectorXd pi = l.cwiseProduct(r);
    pi /= pi.sum();
    out.stationary.assign(pi.data(), pi.data() + g.n);
    CompensatedSum h;
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j) {
            double p = out.transition(i, j);
            if (p > 0) h.add(-pi(i) * p * std::log(p));
        }
    out.entropy = h.value();
    return out;
}

// Locally constant data on a finite edge-labelled graph: each symbol is an edge
// between two states carrying a Birkhoff sum, a log-derivative and a return time.
struct SymbolData {
    int src = 0, dst = 0;
    double phi = 0.0;
    double logd = 0.0;
    double r = 1.0;
};

namespace detail {

// Perron root of a sparse nonnegative matrix through I + A, which is primitive
// whenever A is irreducible.
inline double sparse_perron(int n, const std::vector<SymbolData>& syms, const std::vector<double>& w) {
    std::vector<double> v(n, 1.0), nv(n);
    double rho = 0.0;
    for (int it = 0; it < 100000; ++it) {
        std::fill(nv.begin(), nv.end(), 0.0);
        for (std::size_t k = 0; k < syms.size(); ++k) nv[syms[k].src] += w[k] * v[syms[k].dst];
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0, norm = 0.0;
        for (int i = 0; i < n; ++i) {
            double r = nv[i] / v[i];
            lo = std::min(lo, r);
            hi = std::max(hi, r);
            nv[i] += v[i];
            norm = std::max(norm, nv[i]);
        }
        for (int i = 0; i < n; ++i) v[i] = nv[i] / norm;
        rho = 0.5 * (lo + hi);
        if (hi - lo <= 1e-13 * hi) break;
    }
    return rho;
}

}  // namespace detail

// log spectral radius of the state matrix A(u,v) = sum over symbols u->v of exp(weight).
inline double state_pressure(int n_states, const std::vector<SymbolData>& syms, double b, double q, double s) {
    double scale = -std::numeric_limits<double>::infinity();
    std::vector<double> lw(syms.size());
    for (std::size_t k = 0; k < syms.size(); ++k) {
        lw[k] = -q * syms[k].phi - b * syms[k].logd - s * syms[k].r;
        scale = std::max(scale, lw[k]);
    }
    if (n_states > 64) {
        std::vector<double> w(syms.size());
        for (std::size_t k = 0; k < syms.size(); ++k) w[k] = std::exp(lw[k] - scale);
        return scale + std::log(detail::sparse_perron(n_states, syms, w));
    }
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n_states, n_states);
    for (std::size_t k = 0; k < syms.size(); ++k) A(syms[k].src, syms[k].dst) += std::exp(lw[k] - scale);
    Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
    double rho = 0.0;
    for (int k = 0; k < n_states; ++k) rho = std::max(rho, std::abs(es.eigenvalues()[k]));
    return scale + std::log(rho);
}

// Birkhoff spectrum of the finite subshift by the Lagrangian sweep
// b(alpha) = min_q t(q), where t(q) solves P(t, q, -q alpha) = 0.
struct SubshiftSpectrumPoint {
    double b = 0.0;
    double q = 0.0;
};

inline SubshiftSpectrumPoint subshift_spectrum_point(int n_states, const std::vector<SymbolData>& syms, double alpha,
                                                     double q_lo = -10.0, double q_hi = 10.0) {
    // +inf where the weights leave the double range and the root cannot be bracketed
    const double inf = std::numeric_limits<double>::infinity();
    auto t_of_q = [&](double q) {
        auto f = [&](double t) { return state_pressure(n_states, syms, t, q, -q * alpha); };
        double lo = -1.0, hi = 2.0;
        for (int k = 0; k < 60 && f(lo) < 0; ++k) lo -= 2.0;
        for (int k = 0; k < 60 && f(hi) > 0; ++k) hi += 2.0;
        double flo = f(lo), fhi = f(hi);
        if (!std::isfinite(flo) || !std::isfinite(fhi) || !(flo >= 0) || !(fhi <= 0)) return inf;
        return bisect(f, lo, hi, 1e-12);
    };
    // golden section on the convex function t(q)
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = q_lo, d = q_hi;
    double b = d - phi * (d - a), c = a + phi * (d - a);
    double fb = t_of_q(b), fc = t_of_q(c);
    while (d - a > 1e-7) {
        if (fb < fc) {
            d = c;
            c = b;
            fc = fb;
            b = d - phi * (d - a);
            fb = t_of_q(b);
        } else {
            a = b;
            b = c;
            fb = fc;
            c = a + phi * (d - a);
            fc = t_of_q(c);
        }
    }
    SubshiftSpectrumPoint out;
    out.q = 0.5 * (a + d);
    out.b = t_of_q(out.q);
    return out;
}

// Cylinder shift of the map itself: states are letter words of length L-1 and
// each word of length L is an edge carrying phi and log|f'| at a point of its
// cylinder. No inducing is involved.
struct CylinderShift {
    int length = 0;
    int n_states = 0;
    std::vector<SymbolData> edges;
};

inline CylinderShift cylinder_shift(const MapModel& m, const PotentialSpec& phi, int length) {
    const int K = m.alphabet_size();
    if (length < 2 || std::pow(static_cast<double>(K), length) > 4.0e6)
        throw Error(ErrorKind::InvalidParameter, "cylinder_shift: length out of range");
    CylinderShift cs;
    cs.length = length;
    long n_words = 1;
    for (int i = 0; i < length; ++i) n_words *= K;
    cs.n_states = static_cast<int>(n_words / K);
    std::vector<int> letters(length);
    for (long code = 0; code < n_words; ++code) {
        long c = code;
        for (int i = length - 1; i >= 0; --i) {
            letters[i] = static_cast<int>(c % K);
            c /= K;
        }
        // centre of the cylinder: pull the midpoint of [0,1] back along the word
        double x = 0.5;
        for (int i = length - 1; i >= 0; --i) x = m.branch(letters[i]).inverse(x);
        SymbolData e;
        e.src = static_cast<int>(code / K);
        e.dst = static_cast<int>(code % cs.n_states);
        e.phi = phi(x, letters[0]);
        e.logd = m.branch(letters[0]).log_abs_derivative(x);
        e.r = 1.0;
        cs.edges.push_back(e);
    }
    return cs;
}

// ---------------------------------------------------------------------------
// Exhaustive cycle search

struct CycleEdge {
    int from = 0, to = 0;
    double num = 0.0;
    double den = 1.0;
};

struct CycleExtremes {
    double min = std::numeric_limits<double>::infinity();
    double max = -std::numeric_limits<double>::infinity();
    long cycles = 0;
};

// Min and max of sum(num)/sum(den) over all cycles that visit distinct
// vertices and use at most max_len edges.
inline CycleExtremes exhaustive_cycle_means(int n_vertices, const std::vector<CycleEdge>& edges, int max_len) {
    if (max_len < 1 || max_len > 6) throw Error(ErrorKind::InvalidParameter, "exhaustive_cycle_means: max_len must be in [1, 6]");
    std::vector<std::vector<int>> out(n_vertices);
    for (std::size_t e = 0; e < edges.size(); ++e) out[edges[e].from].push_back(static_cast<int>(e));
    CycleExtremes res;
    std::vector<char> on_path(n_vertices, 0);
    // start vertex is the smallest on the cycle, so each cycle is visited once per rotation class
    for (int start = 0; start < n_vertices; ++start) {
        std::function<void(int, double, double, int)> dfs = [&](int v, double num, double den, int depth) {
            for (int e : out[v]) {
                const auto& E = edges[e];
                double n2 = num + E.num, d2 = den + E.den;
                if (E.to == start) {
                    double m = n2 / d2;
                    res.min = std::min(res.min, m);
                    res.max = std::max(res.max, m);
                    ++res.cycles;
                    continue;
                }
                if (E.to < start || on_path[E.to] || depth + 1 >= max_len) continue;
                on_path[E.to] = 1;
                dfs(E.to, n2, d2, depth + 1);
                on_path[E.to] = 0;
            }
        };
        on_path[start] = 1;
        dfs(start, 0.0, 0.0, 0);
        on_path[start] = 0;
    }
    return res;
}

// ---------------------------------------------------------------------------
// Orbit histogram of Birkhoff averages

struct Histogram {
    double lo = 0.0, hi = 1.0;
    std::vector<long> counts;
    double mean = 0.0;
    double mode_center() const {
        auto it = std::max_element(counts.begin(), counts.end());
        double w = (hi - lo) / static_cast<double>(counts.size());
        return lo + (static_cast<double>(it - counts.begin()) + 0.5) * w;
    }
    Interval mode_bin() const {
        double w = (hi - lo) / static_cast<double>(counts.size());
        double c = mode_center();
        return {c - 0.5 * w, c + 0.5 * w};
    }
};

inline int branch_of(const MapModel& m, double x) {
    for (const auto& b : m.branches)
        if (x >= b.domain.lo && x <= b.domain.hi) return b.index;
    return -1;
}

inline Histogram orbit_birkhoff_histogram(const MapModel& m, const PotentialSpec& phi, int n_points, int n_iter, int bins = 50,
                                         double lo = 0.0, double hi = 1.0, std::uint64_t seed = 12345ULL) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Histogram h;
    h.lo = lo;
    h.hi = hi;
    h.counts.assign(bins, 0);
    CompensatedSum total;
    for (int p = 0; p < n_points; ++p) {
        double x = unif(rng);
        CompensatedSum acc;
        for (int it = 0; it < n_iter; ++it) {
            int br = branch_of(m, x);
            if (br < 0) throw Error(ErrorKind::Model, "orbit left [0,1] at x = " + std::to_string(x));
            acc.add(phi(x, br));
            x = m.branch(br).forward(x);
            if (!(x >= 0.0 && x <= 1.0)) {
                // fold rounding at the branch ends back into the interval
                if (x > 1.0 && x < 1.0 + 1e-12)
                    x = 1.0;
                else if (x < 0.0 && x > -1e-12)
                    x = 0.0;
                else
                    throw Error(ErrorKind::Model, "orbit left [0,1]");
            }
        }
        double avg = acc.value() / n_iter;
        total.add(avg);
        int bin = static_cast<int>(std::floor((avg - lo) / (hi - lo) * bins));
        bin = std::clamp(bin, 0, bins - 1);
        ++h.counts[bin];
    }
    h.mean = total.value() / n_points;
    return h;
}

}  // namespace thermo::oracle

#endif
