#ifndef THERMO_GIBBS_MEASURES_HPP
#define THERMO_GIBBS_MEASURES_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "numerics.hpp"
#include "pressure_engine.hpp"
#include "transfer_operator.hpp"

namespace thermo {

// Markov approximation of the induced Gibbs measure on 1-cylinders. Each state of
// the chain is an operator symbol; the last member of a parabolic family stands
// for the whole truncated tail of that family.
struct GibbsApprox {
    Query query;
    double perron_value = 0.0;  // induced pressure at query
    std::vector<double> stationary;
    Eigen::MatrixXd transition;
    double gibbs_constant = 1.0;
    int gibbs_samples = 0;
    double stationarity_residual = 0.0;
    double row_sum_residual = 0.0;
    double min_pair_mass = 0.0;  // most negative raw 2-cylinder mass before clipping

    // per-symbol conditional means under the measure, tails included
    std::vector<double> cond_r, cond_phi, cond_logd;
    std::vector<double> tail_factor;   // tau for family representatives, else 0
    std::vector<double> tail_entropy;  // entropy of the member distribution inside a folded family
    PointEval eval;
};

namespace detail {

// Symbol operators normalized so that the Perron root is one.
struct SymbolAction {
    const OperatorData* op = nullptr;
    std::vector<std::vector<double>> weight;  // at target nodes, tail multiplier included

    std::vector<double> apply(int k, const std::vector<double>& u) const {
        const auto& s = op->symbols[k];
        const int nd = op->states[s.dst].nodes;
        const int ns = op->states[s.src].nodes;
        std::vector<double> out(nd);
        for (int j = 0; j < nd; ++j) {
            double acc = 0.0;
            for (int c = 0; c < ns; ++c) acc += s.interp[j * ns + c] * u[c];
            out[j] = weight[k][j] * acc;
        }
        return out;
    }
};

inline std::vector<double> state_slice(const OperatorData& op, const std::vector<double>& v, int state) {
    const auto& g = op.states[state];
    return {v.begin() + g.offset, v.begin() + g.offset + g.nodes};
}

// Sup-norm centre of the potential along a symbol, used for Gibbs ratios.
inline double symbol_log_weight(const OperatorSymbol& s, const Query& qy) {
    return psi(qy, s.phi_bar_bracket.mid(), s.log_deriv_bracket.mid(), s.r);
}

}  // namespace detail

inline GibbsApprox gibbs_approx(const PressureEngine& engine, const Query& qy) {
    FinReport fin = engine.is_finite(qy);
    if (fin.verdict == FinVerdict::Divergent) throw Error(ErrorKind::Domain, "gibbs_approx: divergent parameters, " + fin.detail);
    const OperatorData& op = engine.operator_data();
    GibbsApprox g;
    g.query = qy;
    g.eval = engine.evaluate(qy);
    const PointEval& ev = g.eval;
    g.perron_value = ev.pressure;
    const int ns = static_cast<int>(op.symbols.size());

    detail::SymbolAction act{&op, {}};
    act.weight.resize(ns);
    g.tail_factor.assign(ns, 0.0);
    g.tail_entropy.assign(ns, 0.0);
    for (std::size_t f = 0; f < op.tails.size(); ++f) {
        const TailTerm& t = ev.tails[f];
        const TailFamily& fam = op.tails[f];
        double tau = std::exp(t.log_factor);
        int k = fam.symbol;
        g.tail_factor[k] = tau;
        // member weights 1 and w_j (j > n) normalized by 1 + tau
        TailModel tm{fam.n, qy.b * (1.0 + fam.gamma), -qy.q * fam.alpha - qy.s, -qy.q * fam.drift, fam.kappa};
        double mean_logw = -tm.p * t.sums.mean_log() + tm.r * (t.sums.mean_k() - fam.n) + tm.drift * t.sums.mean_g();
        g.tail_entropy[k] = std::log1p(tau) - tau * mean_logw / (1.0 + tau);
    }
    for (int k = 0; k < ns; ++k) {
        const auto& s = op.symbols[k];
        act.weight[k].resize(s.phi_bar.size());
        for (std::size_t j = 0; j < s.phi_bar.size(); ++j)
            act.weight[k][j] = std::exp(detail::psi(qy, s.phi_bar[j], s.log_deriv[j], s.r) - ev.pressure) * (1.0 + g.tail_factor[k]);
    }

    // row functionals rho_k(u) = <nu, L_k u> / <nu, h>
    double nh = 0.0;
    for (int a = 0; a < op.total_nodes; ++a) nh += ev.left[a] * ev.right[a];
    std::vector<std::vector<double>> rho(ns);
    for (int k = 0; k < ns; ++k) {
        const auto& s = op.symbols[k];
        const int nd = op.states[s.dst].nodes;
        const int nsrc = op.states[s.src].nodes;
        const int off = op.states[s.dst].offset;
        rho[k].assign(nsrc, 0.0);
        for (int j = 0; j < nd; ++j) {
            double c0 = ev.left[off + j] * act.weight[k][j] / nh;
            for (int c = 0; c < nsrc; ++c) rho[k][c] += c0 * s.interp[j * nsrc + c];
        }
    }
    auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
        double acc = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
        return acc;
    };

    g.stationary.assign(ns, 0.0);
    std::vector<std::vector<double>> pushed(ns);
    for (int k = 0; k < ns; ++k) {
        const auto& s = op.symbols[k];
        g.stationary[k] = dot(rho[k], detail::state_slice(op, ev.right, s.src));
        pushed[k] = act.apply(k, detail::state_slice(op, ev.right, s.src));
    }
    g.transition = Eigen::MatrixXd::Zero(ns, ns);
    for (int k1 = 0; k1 < ns; ++k1) {
        const int mid = op.symbols[k1].dst;
        if (!(g.stationary[k1] > 0)) throw Error(ErrorKind::Structural, "gibbs_approx: non-positive cylinder mass");
        for (int k2 : op.symbols_from[mid]) {
            double m = dot(rho[k2], pushed[k1]);
            g.min_pair_mass = std::min(g.min_pair_mass, m);
            g.transition(k1, k2) = std::max(m, 0.0) / g.stationary[k1];
        }
    }
    for (int k = 0; k < ns; ++k) {
        double row = g.transition.row(k).sum();
        g.row_sum_residual = std::max(g.row_sum_residual, std::abs(row - 1.0));
        if (!(row > 0)) throw Error(ErrorKind::Structural, "gibbs_approx: reducible truncated graph");
        g.transition.row(k) /= row;
    }
    CompensatedSum total;
    for (double m : g.stationary) total.add(m);
    for (double& m : g.stationary) m /= total.value();
    Eigen::Map<const Eigen::RowVectorXd> pi(g.stationary.data(), ns);
    Eigen::RowVectorXd pit = pi * g.transition;
    g.stationarity_residual = (pit - pi).cwiseAbs().maxCoeff();

    // conditional means on each symbol, tails included
    g.cond_r.assign(ns, 0.0);
    g.cond_phi.assign(ns, 0.0);
    g.cond_logd.assign(ns, 0.0);
    std::vector<int> family_of(ns, -1);
    for (std::size_t f = 0; f < op.tails.size(); ++f) family_of[op.tails[f].symbol] = static_cast<int>(f);
    for (int k = 0; k < ns; ++k) {
        const auto& s = op.symbols[k];
        const int off = op.states[s.dst].offset;
        const int nsrc = op.states[s.src].nodes;
        const auto hs = detail::state_slice(op, ev.right, s.src);
        double m = 0.0, mp = 0.0, ml = 0.0;
        for (std::size_t j = 0; j < s.phi_bar.size(); ++j) {
            double eh = 0.0;
            for (int c = 0; c < nsrc; ++c) eh += s.interp[j * nsrc + c] * hs[c];
            double w = ev.left[off + j] * act.weight[k][j] * eh;
            m += w;
            mp += w * s.phi_bar[j];
            ml += w * s.log_deriv[j];
        }
        g.cond_r[k] = s.r;
        g.cond_phi[k] = mp / m;
        g.cond_logd[k] = ml / m;
        int f = family_of[k];
        if (f >= 0) {
            const TailTerm& t = ev.tails[f];
            double share = g.tail_factor[k] / (1.0 + g.tail_factor[k]);
            g.cond_r[k] += share * t.r_shift;
            g.cond_phi[k] += share * t.phi_shift;
            g.cond_logd[k] += share * t.ld_shift;
        }
    }

    // Gibbs ratios on 1-, 2- and 3-cylinders of unfolded symbols
    std::vector<int> short1, short2, short3;
    for (int k = 0; k < ns; ++k) {
        if (family_of[k] >= 0) continue;
        short1.push_back(k);
        if (op.symbols[k].r <= 16) short2.push_back(k);
        if (op.symbols[k].r <= 6) short3.push_back(k);
    }
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    auto record = [&](double mass, double logw) {
        if (!(mass > 0)) return;
        double r = std::log(mass) - logw;
        lo = std::min(lo, r);
        hi = std::max(hi, r);
        ++g.gibbs_samples;
    };
    std::vector<double> lw(ns);
    for (int k = 0; k < ns; ++k) lw[k] = detail::symbol_log_weight(op.symbols[k], qy) - ev.pressure;
    for (int k : short1) record(g.stationary[k], lw[k]);
    for (int k1 : short2)
        for (int k2 : short2)
            if (op.symbols[k2].src == op.symbols[k1].dst) record(g.stationary[k1] * g.transition(k1, k2), lw[k1] + lw[k2]);
    for (int k1 : short3)
        for (int k2 : short3) {
            if (op.symbols[k2].src != op.symbols[k1].dst) continue;
            auto u2 = act.apply(k2, pushed[k1]);
            for (int k3 : short3)
                if (op.symbols[k3].src == op.symbols[k2].dst) record(dot(rho[k3], u2) / total.value(), lw[k1] + lw[k2] + lw[k3]);
        }
    if (g.gibbs_samples > 0) g.gibbs_constant = std::exp(std::max(hi, -lo));
    return g;
}

// Conditional entropy of the chain plus the within-family entropy of folded tails.
inline double chain_entropy(const GibbsApprox& g) {
    CompensatedSum h;
    const int ns = static_cast<int>(g.stationary.size());
    for (int i = 0; i < ns; ++i) {
        double row = 0.0;
        for (int j = 0; j < ns; ++j) {
            double p = g.transition(i, j);
            if (p > 0) row -= p * std::log(p);
        }
        h.add(g.stationary[i] * (row + g.tail_entropy[i]));
    }
    return h.value();
}

struct ProjectedStats {
    double lambda = 0.0;
    double alpha = 0.0;
    double entropy = 0.0;
    double dim = 0.0;
};

struct MeasureStats {
    Query query;
    double mean_R = 0.0;
    double mean_R2 = 0.0;
    double mean_phi_bar = 0.0;
    Interval mean_phi_bar_bracket;
    double lambda_induced = 0.0;
    Interval lambda_induced_bracket;
    double entropy_induced = 0.0;
    double chain_entropy = 0.0;
    double tail_mass = 0.0;     // mass of the folded family tails
    double tail_R_share = 0.0;  // fraction of mean_R carried by tails
    double tail_rate = 0.0;     // worst geometric decay rate of the tails
    bool tail_warning = false;
    ProjectedStats projected;
};

inline ProjectedStats project_measure(const MeasureStats& st) {
    if (!(st.mean_R >= 1.0) || !std::isfinite(st.mean_R)) throw Error(ErrorKind::Domain, "project_measure: mean return time not finite");
    ProjectedStats p;
    p.lambda = st.lambda_induced / st.mean_R;
    p.alpha = st.mean_phi_bar / st.mean_R;
    p.entropy = st.entropy_induced / st.mean_R;
    if (!(p.lambda > 0)) throw Error(ErrorKind::Domain, "project_measure: non-positive Lyapunov exponent");
    p.dim = p.entropy / p.lambda;
    return p;
}

inline MeasureStats measure_stats(const PressureEngine& engine, const GibbsApprox& g, double rate_floor = 1e-3) {
    const OperatorData& op = engine.operator_data();
    const PointEval& ev = g.eval;
    const Query& qy = g.query;
    MeasureStats st;
    st.query = qy;
    st.mean_R = ev.mean_r;
    st.mean_R2 = ev.mean_r2;
    st.mean_phi_bar = ev.mean_phi;
    st.lambda_induced = ev.mean_logd;
    st.entropy_induced = ev.entropy;
    st.chain_entropy = chain_entropy(g);
    st.tail_mass = ev.tail_mass_total;

    // cylinder brackets weighted by the symbol masses
    CompensatedSum plo, phi, llo, lhi;
    for (std::size_t k = 0; k < op.symbols.size(); ++k) {
        const auto& s = op.symbols[k];
        double m = ev.symbol_mass[k];
        plo.add(m * s.phi_bar_bracket.lo);
        phi.add(m * s.phi_bar_bracket.hi);
        llo.add(m * s.log_deriv_bracket.lo);
        lhi.add(m * s.log_deriv_bracket.hi);
    }
    double r_tail = 0.0;
    st.tail_rate = std::numeric_limits<double>::infinity();
    for (std::size_t f = 0; f < op.tails.size(); ++f) {
        const auto& fam = op.tails[f];
        const auto& s = op.symbols[fam.symbol];
        const TailTerm& t = ev.tails[f];
        double mt = ev.tail_mass[f];
        double dphi = t.phi_shift, dld = t.ld_shift;
        plo.add(mt * (s.phi_bar_bracket.lo + dphi - std::abs(fam.eps * t.r_shift)));
        phi.add(mt * (s.phi_bar_bracket.hi + dphi + std::abs(fam.eps * t.r_shift)));
        llo.add(mt * (s.log_deriv_bracket.lo + dld - std::log(fam.c_tail)));
        lhi.add(mt * (s.log_deriv_bracket.hi + dld + std::log(fam.c_tail)));
        r_tail += mt * (s.r + t.r_shift);
        double rate = qy.s + qy.q * fam.alpha - std::abs(qy.q) * fam.eps;
        st.tail_rate = std::min(st.tail_rate, rate);
    }
    st.mean_phi_bar_bracket = {plo.value(), phi.value()};
    st.mean_phi_bar_bracket.include(st.mean_phi_bar);
    st.lambda_induced_bracket = {llo.value(), lhi.value()};
    st.lambda_induced_bracket.include(st.lambda_induced);
    st.tail_R_share = st.mean_R > 0 ? r_tail / st.mean_R : 0.0;
    st.tail_warning = !op.tails.empty() && st.tail_rate <= rate_floor;
    st.projected = project_measure(st);
    return st;
}

inline MeasureStats measure_stats(const PressureEngine& engine, const Query& qy) {
    return measure_stats(engine, gibbs_approx(engine, qy));
}

// Birkhoff average of the potential along a sampled path of the chain,
// read through the return time.
struct OrbitSample {
    double alpha = 0.0;
    double lambda = 0.0;
    double mean_R = 0.0;
    long steps = 0;
};

inline OrbitSample sample_chain_orbit(const GibbsApprox& g, long steps, std::uint64_t seed = 20240611ULL) {
    const int ns = static_cast<int>(g.stationary.size());
    std::mt19937_64 rng(seed);
    std::discrete_distribution<int> start(g.stationary.begin(), g.stationary.end());
    std::vector<std::discrete_distribution<int>> rows;
    rows.reserve(ns);
    for (int i = 0; i < ns; ++i) {
        std::vector<double> w(ns);
        for (int j = 0; j < ns; ++j) w[j] = g.transition(i, j);
        rows.emplace_back(w.begin(), w.end());
    }
    CompensatedSum sr, sp, sl;
    int x = start(rng);
    for (long t = 0; t < steps; ++t) {
        sr.add(g.cond_r[x]);
        sp.add(g.cond_phi[x]);
        sl.add(g.cond_logd[x]);
        x = rows[x](rng);
    }
    OrbitSample o;
    o.steps = steps;
    o.mean_R = sr.value() / static_cast<double>(steps);
    o.alpha = sp.value() / sr.value();
    o.lambda = sl.value() / sr.value();
    return o;
}

}  // namespace thermo

#endif
