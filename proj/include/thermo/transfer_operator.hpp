#ifndef THERMO_TRANSFER_OPERATOR_HPP
#define THERMO_TRANSFER_OPERATOR_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "induced_system.hpp"
#include "interval_map.hpp"
#include "numerics.hpp"

namespace thermo {

// Collocation of the induced transfer operator
//   (L h)(y) = sum_w exp(psi_w(T_w y)) h(T_w y),  psi = -q Phi - b log|F'| - s R,
// on Chebyshev nodes of each state interval, with the truncated tail of every
// parabolic family folded into its last member.

struct StateGrid {
    Interval span;
    int offset = 0;
    int nodes = 1;
    int checks = 1;
    std::vector<double> node_points;
    std::vector<double> check_points;
    std::vector<double> check_interp;  // checks x nodes
};

struct OperatorSymbol {
    int word = -1;
    int src = 0;
    int dst = 0;
    int r = 1;
    int family = -1;  // set on the last member of a parabolic family
    std::vector<double> log_deriv, phi_bar;  // at target nodes
    std::vector<double> interp;              // target nodes x source nodes
    std::vector<double> chk_log_deriv, chk_phi_bar;
    std::vector<double> chk_interp;  // target checks x source nodes
    Interval log_deriv_bracket, phi_bar_bracket;
    std::vector<Interval> log_deriv_by_successor, phi_bar_by_successor;
};

struct TailFamily {
    int symbol = -1;
    int n = 0;
    double alpha = 0.0;
    double gamma = 1.0;
    double eps = 0.0;       // sup |phi - alpha| at the deepest sampled block point
    double c_tail = 1.0;    // spread of log|F'| - (1+gamma) log n over the last octave
    double drift = 0.0;     // D_n n, the potential-sum drift coefficient
    double kappa = 1.0;     // decay exponent of phi - alpha along the block
};

struct OperatorData {
    std::vector<StateGrid> states;
    int total_nodes = 0;
    std::vector<OperatorSymbol> symbols;
    std::vector<std::vector<int>> symbols_from;
    std::vector<TailFamily> tails;
    int n_max = 0;
    int depth = 0;
    bool transition_brackets = false;
};

struct DiscretizationSettings {
    int nodes = 24;
    int checks = 64;
};

namespace detail {

inline void finalize_operator(OperatorData& op) {
    op.symbols_from.assign(op.states.size(), {});
    for (std::size_t k = 0; k < op.symbols.size(); ++k) op.symbols_from[op.symbols[k].src].push_back(static_cast<int>(k));
    for (auto& f : op.tails) op.symbols[f.symbol].family = static_cast<int>(&f - op.tails.data());
}

}  // namespace detail

inline OperatorData build_map_operator(const MapModel& m, const PotentialSpec& phi, const TruncatedAlphabet& A,
                                       const CylinderTable& table, const DiscretizationSettings& ds) {
    if (ds.nodes < 2 || ds.checks < 2) throw Error(ErrorKind::InvalidParameter, "discretization needs >= 2 nodes and checks");
    OperatorData op;
    op.n_max = A.n_max();
    op.depth = table.depth;
    op.transition_brackets = table.depth >= 1;
    const int ns = A.n_states();
    std::vector<ChebyshevGrid> grids;
    int offset = 0;
    for (int t = 0; t < ns; ++t) {
        StateGrid g;
        g.span = state_interval(m, A.state(t).first, A.state(t).second);
        ChebyshevGrid cg(g.span, ds.nodes);
        g.nodes = ds.nodes;
        g.checks = ds.checks;
        g.offset = offset;
        offset += g.nodes;
        g.node_points = cg.nodes;
        for (int c = 0; c < ds.checks; ++c) {
            double y = g.span.lo + g.span.width() * c / (ds.checks - 1);
            g.check_points.push_back(y);
            auto row = cg.interpolation_row(y);
            g.check_interp.insert(g.check_interp.end(), row.begin(), row.end());
        }
        grids.push_back(cg);
        op.states.push_back(std::move(g));
    }
    op.total_nodes = offset;
    op.symbols.resize(A.size());

    auto record = [&](OperatorSymbol& s, bool check, const OrbitSums& o) {
        const ChebyshevGrid& src = grids[s.src];
        auto row = src.interpolation_row(std::clamp(o.point, src.domain.lo, src.domain.hi));
        if (check) {
            s.chk_log_deriv.push_back(o.log_deriv);
            s.chk_phi_bar.push_back(o.phi_sum);
            s.chk_interp.insert(s.chk_interp.end(), row.begin(), row.end());
        } else {
            s.log_deriv.push_back(o.log_deriv);
            s.phi_bar.push_back(o.phi_sum);
            s.interp.insert(s.interp.end(), row.begin(), row.end());
        }
    };
    for (int w = 0; w < A.size(); ++w) {
        OperatorSymbol& s = op.symbols[w];
        const Cylinder& c = table.cylinders[w];
        s.word = w;
        s.src = A.source(w);
        s.dst = A.target(w);
        s.r = A.word(w).return_time;
        s.log_deriv_bracket = c.log_deriv;
        s.phi_bar_bracket = c.phi_bar;
        s.log_deriv_by_successor = c.log_deriv_by_successor;
        s.phi_bar_by_successor = c.phi_bar_by_successor;
        if (A.word(w).kind == WordKind::Short) {
            for (double y : op.states[s.dst].node_points) record(s, false, pull_back(m, &phi, A.word(w).prefix(), y));
            for (double y : op.states[s.dst].check_points) record(s, true, pull_back(m, &phi, A.word(w).prefix(), y));
        }
    }

    // Parabolic families, swept in n.
    std::map<std::pair<int, std::pair<int, int>>, std::vector<int>> families;
    for (int w = 0; w < A.size(); ++w) {
        const InducedWord& word = A.word(w);
        if (word.kind != WordKind::ParabolicBlock) continue;
        auto& ids = families[{word.letters.front(), {word.letters[1], word.letters.back()}}];
        if (static_cast<int>(ids.size()) < word.return_time + 1) ids.resize(word.return_time + 1, -1);
        ids[word.return_time] = w;
    }
    for (const auto& [key, ids] : families) {
        const int j = key.first, i = key.second.first, k = key.second.second;
        const int t = A.state_index({i, k});
        const int nmax = static_cast<int>(ids.size()) - 1;
        const double gam = m.gamma;
        double spread = 0.0;
        for (int pass = 0; pass < 2; ++pass) {
            const auto& ys = pass == 0 ? op.states[t].node_points : op.states[t].check_points;
            for (double y : ys) {
                double dmin = std::numeric_limits<double>::infinity(), dmax = -dmin;
                family_sweep(m, &phi, j, i, y, nmax, [&](int n, const OrbitSums& o) {
                    if (ids[n] >= 0) record(op.symbols[ids[n]], pass == 1, o);
                    if (2 * n >= nmax) {
                        double d = o.log_deriv - (1.0 + gam) * std::log(static_cast<double>(n));
                        dmin = std::min(dmin, d);
                        dmax = std::max(dmax, d);
                    }
                });
                spread = std::max(spread, dmax - dmin);
            }
        }
        if (nmax < 2 || ids[nmax] < 0) continue;
        TailFamily f;
        f.symbol = ids[nmax];
        f.n = nmax;
        f.alpha = phi.alpha(i);
        f.gamma = gam;
        f.c_tail = std::exp(spread);
        // deviation of phi from alpha at the innermost block points z_{n-1} and z_{n/2-1}
        double dev_n = 0.0, dev_half = 0.0;
        int cnt = 0;
        for (double y : op.states[t].node_points) {
            double z = y;
            for (int l = 1; l < nmax; ++l) {
                z = checked_inverse(m.branch(i), z);
                if (l == nmax / 2 - 1) dev_half += phi(z, i) - f.alpha;
            }
            double dv = phi(z, i) - f.alpha;
            dev_n += dv;
            f.eps = std::max(f.eps, std::abs(dv));
            ++cnt;
        }
        dev_n /= cnt;
        dev_half /= cnt;
        if (dev_n != 0.0 && dev_half != 0.0 && (dev_n > 0) == (dev_half > 0) && std::abs(dev_half) > std::abs(dev_n)) {
            f.kappa = std::clamp(std::log(dev_half / dev_n) / std::log(static_cast<double>(nmax) / (nmax / 2 - 1)), 0.2, 5.0);
            f.drift = dev_n * nmax;
        }
        op.tails.push_back(f);
    }
    detail::finalize_operator(op);
    return op;
}

// Full shift on k_per_level * n_max symbols with weights (c n^{1+gamma})^{-b} e^{-s n}
// and zero potential; its tails are exact power laws.
inline OperatorData build_linearized_operator(int k_per_level, int n_max, double log_scale, double gamma) {
    if (k_per_level < 1 || n_max < 1) throw Error(ErrorKind::InvalidParameter, "linearized model needs K >= 1 and n_max >= 1");
    OperatorData op;
    op.n_max = n_max;
    StateGrid g;
    g.span = {0.0, 1.0};
    g.node_points = {0.5};
    g.check_points = {0.5};
    g.check_interp = {1.0};
    op.states.push_back(g);
    op.total_nodes = 1;
    for (int n = 1; n <= n_max; ++n)
        for (int k = 0; k < k_per_level; ++k) {
            OperatorSymbol s;
            s.word = static_cast<int>(op.symbols.size());
            s.r = n;
            double ld = log_scale + (1.0 + gamma) * std::log(static_cast<double>(n));
            s.log_deriv = s.chk_log_deriv = {ld};
            s.phi_bar = s.chk_phi_bar = {0.0};
            s.interp = s.chk_interp = {1.0};
            s.log_deriv_bracket = Interval::point(ld);
            s.phi_bar_bracket = Interval::point(0.0);
            op.symbols.push_back(std::move(s));
        }
    for (int k = 0; k < k_per_level; ++k) {
        TailFamily f;
        f.symbol = (n_max - 1) * k_per_level + k;
        f.n = n_max;
        f.gamma = gamma;
        op.tails.push_back(f);
    }
    detail::finalize_operator(op);
    return op;
}

// ---------------------------------------------------------------------------
// Evaluation

struct Query {
    double b = 0.0;
    double q = 0.0;
    double s = 0.0;
};

struct TailTerm {
    TailSums sums;
    double log_factor = -std::numeric_limits<double>::infinity();  // log tau
    double r_shift = 0.0;    // E[k] - n
    double phi_shift = 0.0;  // E[Phi_k - Phi_n]
    double ld_shift = 0.0;   // E[log F'_k - log F'_n]
    bool finite = true;
};

inline TailTerm point_tail(const TailFamily& f, const Query& qy) {
    TailTerm t;
    TailModel tm{f.n, qy.b * (1.0 + f.gamma), -qy.q * f.alpha - qy.s, -qy.q * f.drift, f.kappa};
    t.sums = tail_sums(tm);
    t.finite = t.sums.finite() && t.sums.t0 > 0 && std::isfinite(t.sums.tlog) &&
               std::isfinite(t.sums.tg);
    if (!t.finite) return t;
    t.log_factor = std::log(t.sums.t0);
    t.r_shift = t.sums.mean_k() - f.n;
    t.phi_shift = f.alpha * t.r_shift + f.drift * t.sums.mean_g();
    t.ld_shift = (1.0 + f.gamma) * t.sums.mean_log();
    return t;
}

// Upper tail factor from F1 and the sampled potential deviation.
inline double upper_tail_log_factor(const TailFamily& f, const Query& qy) {
    TailModel tm{f.n, qy.b * (1.0 + f.gamma), -qy.q * f.alpha + std::abs(qy.q) * f.eps - qy.s, 0.0, 1.0};
    TailSums t = tail_sums(tm);
    if (!t.finite() || !(t.t0 > 0)) return std::numeric_limits<double>::infinity();
    return std::log(t.t0) + 2.0 * std::abs(qy.b) * std::log(f.c_tail);
}

struct PointEval {
    double pressure = 0.0;  // log of the Perron root of the collocated operator
    std::vector<double> right, left;
    double mean_r = 0.0, mean_phi = 0.0, mean_logd = 0.0, mean_r2 = 0.0;
    double entropy = 0.0;
    std::vector<double> symbol_mass;
    std::vector<double> tail_mass;
    std::vector<TailTerm> tails;
    double tail_mass_total = 0.0;
    double residual = 0.0;
    int iterations = 0;
};

struct OperatorSettings {
    double eigen_tol = 1e-14;
    int eigen_max_iter = 50000;
};

namespace detail {

inline double psi(const Query& qy, double phi_bar, double log_deriv, int r) {
    return -qy.q * phi_bar - qy.b * log_deriv - qy.s * r;
}

// Largest log weight over symbols and tails; used to keep exponentials in range.
inline double log_scale(const OperatorData& op, const Query& qy, const std::vector<TailTerm>& tails) {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& s : op.symbols)
        for (std::size_t j = 0; j < s.log_deriv.size(); ++j) m = std::max(m, psi(qy, s.phi_bar[j], s.log_deriv[j], s.r));
    for (std::size_t f = 0; f < op.tails.size(); ++f) {
        const auto& s = op.symbols[op.tails[f].symbol];
        for (std::size_t j = 0; j < s.log_deriv.size(); ++j)
            m = std::max(m, psi(qy, s.phi_bar[j], s.log_deriv[j], s.r) + tails[f].log_factor);
    }
    return m;
}

}  // namespace detail

inline PointEval evaluate_point(const OperatorData& op, const Query& qy, const OperatorSettings& os = {}) {
    PointEval ev;
    const int nt = op.total_nodes;
    ev.tails.resize(op.tails.size());
    for (std::size_t f = 0; f < op.tails.size(); ++f) {
        ev.tails[f] = point_tail(op.tails[f], qy);
        if (!ev.tails[f].finite)
            throw Error(ErrorKind::Domain, "divergent tail at (b,q,s)=(" + std::to_string(qy.b) + "," +
                                               std::to_string(qy.q) + "," + std::to_string(qy.s) + ")");
    }
    const double scale = detail::log_scale(op, qy, ev.tails);
    std::vector<double> tail_mult(op.symbols.size(), 1.0);
    for (std::size_t f = 0; f < op.tails.size(); ++f) tail_mult[op.tails[f].symbol] += std::exp(ev.tails[f].log_factor);

    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(nt, nt);
    std::vector<std::vector<double>> weights(op.symbols.size());
    for (std::size_t k = 0; k < op.symbols.size(); ++k) {
        const auto& s = op.symbols[k];
        const auto& gd = op.states[s.dst];
        const auto& gs = op.states[s.src];
        auto& wv = weights[k];
        wv.resize(gd.nodes);
        for (int j = 0; j < gd.nodes; ++j) {
            wv[j] = std::exp(detail::psi(qy, s.phi_bar[j], s.log_deriv[j], s.r) - scale);
            double w = wv[j] * tail_mult[k];
            for (int c = 0; c < gs.nodes; ++c) M(gd.offset + j, gs.offset + c) += w * s.interp[j * gs.nodes + c];
        }
    }
    auto right = perron_iteration(
        [&](const std::vector<double>& v, std::vector<double>& out) {
            Eigen::Map<const Eigen::VectorXd> vv(v.data(), nt);
            Eigen::Map<Eigen::VectorXd> oo(out.data(), nt);
            oo.noalias() = M * vv;
        },
        nt, os.eigen_tol, os.eigen_max_iter);
    auto left = perron_iteration(
        [&](const std::vector<double>& v, std::vector<double>& out) {
            Eigen::Map<const Eigen::VectorXd> vv(v.data(), nt);
            Eigen::Map<Eigen::VectorXd> oo(out.data(), nt);
            oo.noalias() = M.transpose() * vv;
        },
        nt, os.eigen_tol, os.eigen_max_iter);
    if (!right.converged || !left.converged)
        throw Error(ErrorKind::Numeric, "power iteration did not converge, residual " + std::to_string(right.residual));
    if (!(right.value > 0)) throw Error(ErrorKind::Numeric, "non-positive Perron estimate");
    ev.pressure = scale + std::log(right.value);
    ev.residual = right.residual / right.value;
    ev.iterations = right.iterations;
    ev.right = right.vector;
    ev.left = left.vector;

    // Ruelle derivatives: d log(lambda) = <nu, dM h> / (lambda <nu, h>)
    double nh = 0.0;
    for (int a = 0; a < nt; ++a) nh += ev.left[a] * ev.right[a];
    const double norm = right.value * nh;
    CompensatedSum mr, mp, ml, mr2, tot_tail;
    ev.symbol_mass.assign(op.symbols.size(), 0.0);
    ev.tail_mass.assign(op.tails.size(), 0.0);
    std::vector<int> family_of(op.symbols.size(), -1);
    for (std::size_t f = 0; f < op.tails.size(); ++f) family_of[op.tails[f].symbol] = static_cast<int>(f);
    for (std::size_t k = 0; k < op.symbols.size(); ++k) {
        const auto& s = op.symbols[k];
        const auto& gd = op.states[s.dst];
        const auto& gs = op.states[s.src];
        CompensatedSum mass, phi_m, ld_m;
        for (int j = 0; j < gd.nodes; ++j) {
            double eh = 0.0;
            for (int c = 0; c < gs.nodes; ++c) eh += s.interp[j * gs.nodes + c] * ev.right[gs.offset + c];
            double contrib = ev.left[gd.offset + j] * weights[k][j] * eh / norm;
            mass.add(contrib);
            phi_m.add(contrib * s.phi_bar[j]);
            ld_m.add(contrib * s.log_deriv[j]);
        }
        double m1 = mass.value();
        ev.symbol_mass[k] = m1;
        mr.add(m1 * s.r);
        mr2.add(m1 * s.r * s.r);
        mp.add(phi_m.value());
        ml.add(ld_m.value());
        int f = family_of[k];
        if (f >= 0) {
            const TailTerm& t = ev.tails[f];
            double tau = std::exp(t.log_factor);
            double mt = m1 * tau;
            ev.tail_mass[f] = mt;
            tot_tail.add(mt);
            mr.add(mt * (s.r + t.r_shift));
            mr2.add(mt * t.sums.t2 / t.sums.t0);
            mp.add(tau * phi_m.value() + mt * t.phi_shift);
            ml.add(tau * ld_m.value() + mt * t.ld_shift);
        }
    }
    ev.tail_mass_total = tot_tail.value();
    ev.mean_r = mr.value();
    ev.mean_r2 = mr2.value();
    ev.mean_phi = mp.value();
    ev.mean_logd = ml.value();
    ev.entropy = ev.pressure + qy.q * ev.mean_phi + qy.b * ev.mean_logd + qy.s * ev.mean_r;
    return ev;
}

// Collatz-Wielandt enclosure of the Perron root using the collocated eigenfunction
// as test function, evaluated on the check grid of every state.
struct CwBracket {
    Interval log_bracket;
    double tail_bound = 0.0;
    bool valid = false;
};

inline CwBracket collatz_wielandt(const OperatorData& op, const Query& qy, const std::vector<double>& h) {
    CwBracket out;
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> upper_tail(op.tails.size());
    for (std::size_t f = 0; f < op.tails.size(); ++f) upper_tail[f] = upper_tail_log_factor(op.tails[f], qy);
    double scale = -inf;
    for (const auto& s : op.symbols)
        for (std::size_t j = 0; j < s.chk_log_deriv.size(); ++j)
            scale = std::max(scale, detail::psi(qy, s.chk_phi_bar[j], s.chk_log_deriv[j], s.r));

    // h at check points of each state, and its maximum per state
    std::vector<std::vector<double>> hc(op.states.size());
    std::vector<double> hmax(op.states.size(), 0.0);
    for (std::size_t t = 0; t < op.states.size(); ++t) {
        const auto& g = op.states[t];
        hc[t].resize(g.checks);
        for (int m = 0; m < g.checks; ++m) {
            double v = 0.0;
            for (int c = 0; c < g.nodes; ++c) v += g.check_interp[m * g.nodes + c] * h[g.offset + c];
            hc[t][m] = v;
            if (!(v > 0)) return out;
            hmax[t] = std::max(hmax[t], v);
        }
    }
    std::vector<std::vector<double>> lh(op.states.size()), lt(op.states.size());
    for (std::size_t t = 0; t < op.states.size(); ++t) {
        lh[t].assign(op.states[t].checks, 0.0);
        lt[t].assign(op.states[t].checks, 0.0);
    }
    std::vector<int> family_of(op.symbols.size(), -1);
    for (std::size_t f = 0; f < op.tails.size(); ++f) family_of[op.tails[f].symbol] = static_cast<int>(f);
    for (std::size_t k = 0; k < op.symbols.size(); ++k) {
        const auto& s = op.symbols[k];
        const auto& gd = op.states[s.dst];
        const auto& gs = op.states[s.src];
        for (int m = 0; m < gd.checks; ++m) {
            double lw = detail::psi(qy, s.chk_phi_bar[m], s.chk_log_deriv[m], s.r) - scale;
            double hx = 0.0;
            for (int c = 0; c < gs.nodes; ++c) hx += s.chk_interp[m * gs.nodes + c] * h[gs.offset + c];
            lh[s.dst][m] += std::exp(lw) * hx;
            int f = family_of[k];
            if (f >= 0) lt[s.dst][m] += std::exp(lw + upper_tail[f]) * hmax[s.src];
        }
    }
    double lo = inf, hi = -inf;
    for (std::size_t t = 0; t < op.states.size(); ++t) {
        const int nc = op.states[t].checks;
        std::vector<double> rl(nc), ru(nc);
        for (int m = 0; m < nc; ++m) {
            rl[m] = lh[t][m] / hc[t][m];
            ru[m] = (lh[t][m] + lt[t][m]) / hc[t][m];
            if (lh[t][m] > 0) out.tail_bound = std::max(out.tail_bound, std::log1p(lt[t][m] / lh[t][m]));
        }
        double osc_l = 0.0, osc_u = 0.0;
        for (int m = 0; m + 1 < nc; ++m) {
            osc_l = std::max(osc_l, std::abs(rl[m + 1] - rl[m]));
            osc_u = std::max(osc_u, std::abs(ru[m + 1] - ru[m]));
        }
        lo = std::min(lo, *std::min_element(rl.begin(), rl.end()) - osc_l);
        hi = std::max(hi, *std::max_element(ru.begin(), ru.end()) + osc_u);
    }
    if (!(lo > 0) || !std::isfinite(hi)) {
        out.log_bracket = {-inf, std::isfinite(hi) ? scale + std::log(hi) : inf};
        out.valid = std::isfinite(hi);
        return out;
    }
    out.log_bracket = {scale + std::log(lo), scale + std::log(hi)};
    out.valid = true;
    return out;
}

// Spectral radius of the successor-structured symbol matrix with bracket-end
// weights; the upper matrix adds one tail pseudo-symbol per parabolic family.
inline Interval coarse_bracket(const OperatorData& op, const Query& qy, const OperatorSettings& os = {}) {
    const double inf = std::numeric_limits<double>::infinity();
    auto weight = [&](const Interval& ph, const Interval& ld, int r, bool upper) {
        double phi = (qy.q > 0) == upper ? ph.lo : ph.hi;
        double lg = (qy.b > 0) == upper ? ld.lo : ld.hi;
        if (qy.q == 0) phi = 0.0;
        if (qy.b == 0) lg = 0.0;
        return detail::psi(qy, phi, lg, r);
    };
    const int nsym = static_cast<int>(op.symbols.size());
    std::vector<double> upper_tail(op.tails.size());
    for (std::size_t f = 0; f < op.tails.size(); ++f) upper_tail[f] = upper_tail_log_factor(op.tails[f], qy);

    auto radius = [&](bool upper) {
        const int nf = upper ? static_cast<int>(op.tails.size()) : 0;
        const int n = nsym + nf;
        // node k < nsym is a symbol; nsym + f is the tail pseudo-symbol of family f
        auto node_symbol = [&](int k) { return k < nsym ? k : op.tails[k - nsym].symbol; };
        std::vector<std::vector<double>> lw(n);
        double scale = -inf;
        for (int k = 0; k < n; ++k) {
            const auto& s = op.symbols[node_symbol(k)];
            const auto& succ = op.symbols_from[s.dst];
            double extra = k < nsym ? 0.0 : upper_tail[k - nsym];
            if (op.transition_brackets && k < nsym) {
                lw[k].resize(succ.size() + nf);
                for (std::size_t p = 0; p < succ.size(); ++p)
                    lw[k][p] = weight(s.phi_bar_by_successor[p], s.log_deriv_by_successor[p], s.r, upper);
                double full = weight(s.phi_bar_bracket, s.log_deriv_bracket, s.r, upper);
                for (int f = 0; f < nf; ++f) lw[k][succ.size() + f] = op.symbols[op.tails[f].symbol].src == s.dst ? full : -inf;
            } else {
                lw[k].assign(1, weight(s.phi_bar_bracket, s.log_deriv_bracket, s.r, upper) + extra);
            }
            for (double v : lw[k]) scale = std::max(scale, v + (k < nsym ? 0.0 : 0.0));
        }
        if (!std::isfinite(scale)) return inf;
        std::vector<std::vector<double>> w(n);
        for (int k = 0; k < n; ++k)
            for (double v : lw[k]) w[k].push_back(std::exp(v - scale));
        auto apply = [&](const std::vector<double>& v, std::vector<double>& out) {
            std::vector<double> state_sum(op.states.size(), 0.0);
            for (int k = 0; k < n; ++k) state_sum[op.symbols[node_symbol(k)].src] += v[k];
            for (int k = 0; k < n; ++k) {
                const auto& s = op.symbols[node_symbol(k)];
                if (w[k].size() == 1) {
                    out[k] = w[k][0] * state_sum[s.dst];
                    continue;
                }
                const auto& succ = op.symbols_from[s.dst];
                double acc = 0.0;
                for (std::size_t p = 0; p < succ.size(); ++p) acc += w[k][p] * v[succ[p]];
                for (int f = 0; f < nf; ++f) acc += w[k][succ.size() + f] * v[nsym + f];
                out[k] = acc;
            }
        };
        auto res = perron_iteration(apply, n, os.eigen_tol * 100, os.eigen_max_iter);
        if (!res.converged) throw Error(ErrorKind::Numeric, "coarse power iteration did not converge, residual " +
                                                               std::to_string(res.residual));
        return scale + std::log(res.value);
    };
    return {radius(false), radius(true)};
}

}  // namespace thermo

#endif
