#ifndef THERMO_PRESSURE_ENGINE_HPP
#define THERMO_PRESSURE_ENGINE_HPP

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "induced_system.hpp"
#include "interval_map.hpp"
#include "numerics.hpp"
#include "transfer_operator.hpp"

namespace thermo {

struct EngineSettings {
    int n_max = 256;
    int depth = 1;
    int nodes = 24;
    int checks = 64;
    double eigen_tol = 1e-14;
    int eigen_max_iter = 50000;
    double s_tol = 1e-8;           // bracket tolerance on s
    double s_polish_tol = 1e-13;   // Newton polish of the point root
    double margin = 1e-6;          // N-membership margin above Lambda_q
    double fd_step = 1e-4;         // first derivatives
    double second_step = 5e-3;     // second difference in q
    double derivative_rtol = 1e-2;
    double convexity_tol = 1e-6;
    double power_band = 0.02;      // inconclusive band around the critical power 1
};

using PressureQuery = Query;

struct PressureBracket {
    double lower = 0.0;
    double upper = 0.0;
    int n_max = 0;
    int depth = 0;
    double tail_bound = 0.0;
    double point = 0.0;
    Interval coarse;
    Interval refined;
    bool consistent = true;

    double width() const { return upper - lower; }
    bool contains(double v) const { return v >= lower && v <= upper; }
};

enum class FinVerdict { Finite, Divergent, Inconclusive };

inline const char* to_string(FinVerdict v) {
    switch (v) {
    case FinVerdict::Finite: return "finite";
    case FinVerdict::Divergent: return "divergent";
    case FinVerdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

struct FinReport {
    FinVerdict verdict = FinVerdict::Inconclusive;
    double partial_sum = 0.0;
    double tail_estimate = 0.0;
    Interval rate;   // range of the effective exponential decay rate of the worst family
    double power = 0.0;
    std::string detail;
};

struct DomainFlag {
    bool in_N = false;
    double p_value = 0.0;
    Interval p_bracket;
    double lambda_q = 0.0;
    double margin = 0.0;
    bool fallback = false;
    bool certified = false;
    int iterations = 0;
    double residual = 0.0;
    PressureBracket bracket;
};

struct FirstDerivatives {
    double db = 0.0, dq = 0.0;        // from Gibbs statistics
    double db_fd = 0.0, dq_fd = 0.0;  // central differences of solve_p
    double discrepancy = 0.0;         // max relative disagreement
    bool agree = true;
};

struct SecondDerivative {
    double d2q = 0.0;
    double sigma2 = 0.0;
    bool convexity_violation = false;
};

struct OneSidedDerivatives {
    double right = 0.0;
    double left = 0.0;
    bool inconclusive = false;
    std::vector<double> right_quotients, left_quotients;
};

class PressureEngine {
public:
    PressureEngine(const MapModel& model, const PotentialSpec& potential, EngineSettings settings = {})
        : settings_(settings), model_(std::make_shared<MapModel>(model)),
          potential_(std::make_shared<PotentialSpec>(potential)) {
        alphabet_ = std::make_shared<TruncatedAlphabet>(enumerate_words(model, settings_.n_max));
        table_ = std::make_shared<CylinderTable>(build_cylinder_table(*alphabet_, model, potential, settings_.depth));
        op_ = std::make_shared<OperatorData>(
            build_map_operator(model, potential, *alphabet_, *table_, {settings_.nodes, settings_.checks}));
        gamma_ = model.gamma;
        for (const auto& [i, a] : potential.parabolic_values) alphas_.push_back(a);
        constant_potential_ = potential.constant;
    }

    // Engine over a prebuilt symbolic operator (linearized models).
    PressureEngine(OperatorData op, std::vector<double> parabolic_alphas, double gamma, EngineSettings settings = {})
        : settings_(settings), op_(std::make_shared<OperatorData>(std::move(op))), alphas_(std::move(parabolic_alphas)),
          gamma_(gamma) {
        settings_.n_max = op_->n_max;
        settings_.depth = op_->depth;
    }

    const EngineSettings& settings() const { return settings_; }
    const OperatorData& operator_data() const { return *op_; }
    const MapModel* model() const { return model_.get(); }
    const PotentialSpec* potential() const { return potential_.get(); }
    const TruncatedAlphabet* alphabet() const { return alphabet_.get(); }
    const CylinderTable* cylinders() const { return table_.get(); }
    double gamma() const { return gamma_; }
    const std::vector<double>& parabolic_values() const { return alphas_; }

    double lambda_q(double q) const {
        double best = -std::numeric_limits<double>::infinity();
        for (double a : alphas_) best = std::max(best, -q * a);
        return best;
    }
    double alpha_p_min() const { return *std::min_element(alphas_.begin(), alphas_.end()); }
    double alpha_p_max() const { return *std::max_element(alphas_.begin(), alphas_.end()); }

    OperatorSettings operator_settings() const { return {settings_.eigen_tol, settings_.eigen_max_iter}; }

    PointEval evaluate(const Query& qy) const { return evaluate_point(*op_, qy, operator_settings()); }

    FinReport is_finite(const Query& qy) const {
        FinReport rep;
        rep.power = qy.b * (1.0 + gamma_);
        bool any_div = false, all_fin = true;
        double worst_lo = std::numeric_limits<double>::infinity(), worst_hi = worst_lo;
        std::string why;
        for (const auto& f : op_->tails) {
            double c = qy.s + qy.q * f.alpha;
            double band = std::abs(qy.q) * f.eps;
            worst_lo = std::min(worst_lo, c - band);
            worst_hi = std::min(worst_hi, c + band);
            FinVerdict v;
            if (c - band > 0)
                v = FinVerdict::Finite;
            else if (c + band < 0)
                v = FinVerdict::Divergent;
            else if (band == 0.0 && c == 0.0) {
                if (rep.power > 1.0 + settings_.power_band)
                    v = FinVerdict::Finite;
                else if (rep.power < 1.0 - settings_.power_band)
                    v = FinVerdict::Divergent;
                else
                    v = FinVerdict::Inconclusive;
            } else {
                v = FinVerdict::Inconclusive;
            }
            if (v == FinVerdict::Divergent) any_div = true;
            if (v != FinVerdict::Finite) all_fin = false;
        }
        rep.rate = {worst_lo, worst_hi};
        rep.verdict = any_div ? FinVerdict::Divergent : (all_fin ? FinVerdict::Finite : FinVerdict::Inconclusive);

        // partial sums of sup weights over the truncated alphabet, plus the F1 tail
        std::vector<double> lw;
        for (const auto& s : op_->symbols) {
            double phi = qy.q > 0 ? s.phi_bar_bracket.lo : s.phi_bar_bracket.hi;
            double ld = qy.b > 0 ? s.log_deriv_bracket.lo : s.log_deriv_bracket.hi;
            if (qy.q == 0) phi = 0;
            if (qy.b == 0) ld = 0;
            lw.push_back(-qy.q * phi - qy.b * ld - qy.s * s.r);
        }
        rep.partial_sum = std::exp(log_sum_exp(lw));
        double tail = 0.0;
        for (const auto& f : op_->tails) {
            const auto& s = op_->symbols[f.symbol];
            double phi = qy.q > 0 ? s.phi_bar_bracket.lo : s.phi_bar_bracket.hi;
            double ld = qy.b > 0 ? s.log_deriv_bracket.lo : s.log_deriv_bracket.hi;
            if (qy.q == 0) phi = 0;
            if (qy.b == 0) ld = 0;
            tail += std::exp(-qy.q * phi - qy.b * ld - qy.s * s.r + upper_tail_log_factor(f, qy));
        }
        rep.tail_estimate = tail;
        rep.detail = std::string("rate in [") + std::to_string(worst_lo) + ", " + std::to_string(worst_hi) +
                     "], power " + std::to_string(rep.power);
        return rep;
    }

    PressureBracket induced_pressure(const Query& qy) const {
        FinReport fin = is_finite(qy);
        if (fin.verdict == FinVerdict::Divergent)
            throw Error(ErrorKind::Domain, "induced pressure diverges: " + fin.detail);
        PointEval ev = evaluate(qy);
        return bracket_from(qy, ev);
    }

    PressureBracket bracket_from(const Query& qy, const PointEval& ev) const {
        PressureBracket br;
        br.n_max = op_->n_max;
        br.depth = op_->depth;
        br.point = ev.pressure;
        br.coarse = coarse_bracket(*op_, qy, operator_settings());
        CwBracket cw = collatz_wielandt(*op_, qy, ev.right);
        br.refined = cw.valid ? cw.log_bracket : br.coarse;
        br.tail_bound = cw.tail_bound;
        // eigenvalue rounding can separate the two enclosures by ~1e-13
        constexpr double slack = 1e-12;
        Interval both = br.coarse.widened(slack).intersect(br.refined.widened(slack));
        if (both.empty()) {
            br.consistent = false;
            both = br.coarse;
            both.include(br.refined);
        }
        // floating-point evaluation error of the enclosure itself
        both = both.widened(1e-13 * (1.0 + std::max(std::abs(both.lo), std::abs(both.hi))));
        br.lower = both.lo;
        br.upper = both.hi;
        if (br.point < br.lower - 1e-12 || br.point > br.upper + 1e-12) br.consistent = false;
        return br;
    }

    DomainFlag solve_p(double b, double q) const {
        DomainFlag out;
        const double lq = lambda_q(q);
        out.lambda_q = lq;
        out.margin = settings_.margin;
        const double lo = lq + settings_.margin;
        // a divergent tail means the induced pressure is +infinity there
        auto f = [&](double s) {
            const double inf = std::numeric_limits<double>::infinity();
            if (is_finite({b, q, s}).verdict == FinVerdict::Divergent) return std::make_pair(inf, -inf);
            try {
                PointEval ev = evaluate({b, q, s});
                return std::make_pair(ev.pressure, -ev.mean_r);
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::Domain) throw;
                return std::make_pair(inf, -inf);
            }
        };
        double flo = f(lo).first;
        if (!(flo > 0)) {
            out.in_N = false;
            out.fallback = true;
            out.p_value = lq;
            out.p_bracket = {lq, lq};
            PointEval ev = evaluate({b, q, lo});
            out.bracket = bracket_from({b, q, lo}, ev);
            out.certified = out.bracket.upper < 0;
            out.residual = ev.pressure;
            return out;
        }
        double hi = lo + 1.0;
        int doublings = 0;
        while (f(hi).first > 0) {
            hi = lo + 2.0 * (hi - lo);
            if (++doublings > 60) throw Error(ErrorKind::Convergence, "solve_p: no upper bracket for s");
        }
        RootResult root = safeguarded_newton(f, lo, hi, lo, settings_.s_polish_tol, 200);
        if (!root.converged) throw Error(ErrorKind::Convergence, "solve_p: root finding did not converge");
        double s = root.root;
        PointEval ev = evaluate({b, q, s});
        // one last Newton step from the converged point
        double s2 = s + ev.pressure / ev.mean_r;
        if (std::abs(s2 - s) < 1e-10 && s2 > lo) {
            s = s2;
            ev = evaluate({b, q, s});
        }
        out.p_value = s;
        out.iterations = root.iterations;
        out.residual = ev.pressure;
        out.bracket = bracket_from({b, q, s}, ev);
        out.certified = out.bracket.lower <= 0 && out.bracket.upper >= 0;
        out.p_bracket = {s + out.bracket.lower / ev.mean_r, s + out.bracket.upper / ev.mean_r};
        out.in_N = s > lq + settings_.margin;
        return out;
    }

    double p(double b, double q) const { return solve_p(b, q).p_value; }

    FirstDerivatives derivatives(double b, double q) const {
        DomainFlag d = solve_p(b, q);
        if (!d.in_N) throw Error(ErrorKind::Domain, "derivatives requested outside N");
        PointEval ev = evaluate({b, q, d.p_value});
        FirstDerivatives out;
        out.db = -ev.mean_logd / ev.mean_r;
        out.dq = -ev.mean_phi / ev.mean_r;
        const double h = settings_.fd_step;
        out.db_fd = (p(b + h, q) - p(b - h, q)) / (2 * h);
        out.dq_fd = (p(b, q + h) - p(b, q - h)) / (2 * h);
        auto rel = [](double a, double c) {
            double sc = std::max(std::abs(a), std::abs(c));
            return sc < 1e-12 ? std::abs(a - c) : std::abs(a - c) / sc;
        };
        out.discrepancy = std::max(rel(out.db, out.db_fd), rel(out.dq, out.dq_fd));
        out.agree = out.discrepancy <= settings_.derivative_rtol;
        return out;
    }

    SecondDerivative second_derivative_q(double b, double q) const {
        DomainFlag d = solve_p(b, q);
        if (!d.in_N) throw Error(ErrorKind::Domain, "second derivative requested outside N");
        const double h = settings_.second_step;
        SecondDerivative out;
        out.d2q = (p(b, q + h) - 2.0 * d.p_value + p(b, q - h)) / (h * h);
        PointEval ev = evaluate({b, q, d.p_value});
        out.sigma2 = ev.mean_r * out.d2q;
        out.convexity_violation = out.d2q < -settings_.convexity_tol;
        return out;
    }

    // Difference quotients at steps h0 2^{-k}, Richardson-extrapolated.
    OneSidedDerivatives one_sided_q_derivatives(double b, double q, double h0 = 0.04, int levels = 6) const {
        OneSidedDerivatives out;
        const double p0 = p(b, q);
        for (int k = 0; k < levels; ++k) {
            double h = h0 * std::ldexp(1.0, -k);
            out.right_quotients.push_back((p(b, q + h) - p0) / h);
            out.left_quotients.push_back((p0 - p(b, q - h)) / h);
        }
        auto extrapolate = [](const std::vector<double>& d) { return 2.0 * d[d.size() - 1] - d[d.size() - 2]; };
        out.right = extrapolate(out.right_quotients);
        out.left = extrapolate(out.left_quotients);
        // convexity: right quotients decrease, left quotients increase as h shrinks
        const double slack = 1e-8;
        for (int k = 1; k < levels; ++k) {
            if (out.right_quotients[k] > out.right_quotients[k - 1] + slack) out.inconclusive = true;
            if (out.left_quotients[k] < out.left_quotients[k - 1] - slack) out.inconclusive = true;
        }
        return out;
    }

private:
    EngineSettings settings_;
    std::shared_ptr<const MapModel> model_;
    std::shared_ptr<const PotentialSpec> potential_;
    std::shared_ptr<const TruncatedAlphabet> alphabet_;
    std::shared_ptr<const CylinderTable> table_;
    std::shared_ptr<const OperatorData> op_;
    std::vector<double> alphas_;
    double gamma_ = 1.0;
    bool constant_potential_ = false;
};

}  // namespace thermo

#endif
