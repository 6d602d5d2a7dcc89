#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "thermo/crosscheck.hpp"
#include "thermo/oracle.hpp"
#include "thermo/pressure_engine.hpp"
#include "thermo/spectrum.hpp"

using namespace thermo;

namespace {

const PressureEngine& mp1() {
    static const MapModel m = builtin_manneville_pomeau(1.0);
    static const PressureEngine e(m, identity_potential(m));
    return e;
}

const PressureEngine& mp1_const(double c) {
    static const MapModel m = builtin_manneville_pomeau(1.0);
    static const PressureEngine e0(m, constant_potential(m, 0.0));
    static const PressureEngine e1(m, constant_potential(m, 1.0));
    return c == 0.0 ? e0 : e1;
}

}  // namespace

TEST(InducedPressure, LinearizedModelDilogarithmValue) {
    PressureEngine e(build_linearized_operator(2, 256, 0.0, 1.0), {0.0, 0.0}, 1.0);
    const double l2 = std::log(2.0);
    const double exact = std::log(2.0 * (std::numbers::pi * std::numbers::pi / 12.0 - l2 * l2 / 2.0));
    PressureBracket br = e.induced_pressure({1.0, 0.0, l2});
    EXPECT_TRUE(br.contains(exact)) << br.lower << " " << br.upper << " vs " << exact;
    EXPECT_NEAR(exact, 0.1522755, 1e-7);
}

TEST(InducedPressure, ZeroPotentialIgnoresQ) {
    const PressureEngine& e = mp1_const(0.0);
    PressureBracket a = e.induced_pressure({0.6, 0.0, 0.3});
    for (double q : {-3.0, 1.5}) {
        PressureBracket b = e.induced_pressure({0.6, q, 0.3});
        EXPECT_EQ(a.lower, b.lower);
        EXPECT_EQ(a.upper, b.upper);
    }
}

TEST(InducedPressure, StrictlyDecreasingInS) {
    const PressureEngine& e = mp1();
    PressureBracket prev = e.induced_pressure({0.5, -1.0, 0.5});
    for (double s : {0.6, 0.8, 1.2}) {
        PressureBracket cur = e.induced_pressure({0.5, -1.0, s});
        EXPECT_LT(cur.lower, prev.lower);
        EXPECT_LT(cur.upper, prev.upper);
        prev = cur;
    }
}

TEST(InducedPressure, BracketIsConsistentAndNarrow) {
    const PressureEngine& e = mp1();
    for (auto [b, q, s] : {std::tuple{0.0, 0.0, 0.7}, std::tuple{0.8, -2.0, 1.9}, std::tuple{0.4, 1.0, 0.1}}) {
        PressureBracket br = e.induced_pressure({b, q, s});
        EXPECT_TRUE(br.consistent);
        EXPECT_LE(br.lower, br.point);
        EXPECT_GE(br.upper, br.point);
        EXPECT_LT(br.width(), 1e-3);
    }
}

TEST(FinClassifier, AboveLambdaQIsFinite) {
    const PressureEngine& e = mp1();
    for (double q = -3.0; q <= 3.0; q += 0.5)
        for (double b : {0.0, 0.5, 1.0})
            EXPECT_EQ(e.is_finite({b, q, e.lambda_q(q) + 0.1}).verdict, FinVerdict::Finite) << b << " " << q;
}

TEST(FinClassifier, HarmonicComparison) {
    const PressureEngine& e = mp1();
    const double g = e.gamma();
    EXPECT_EQ(e.is_finite({0.5 / (1.0 + g), 0.0, 0.0}).verdict, FinVerdict::Divergent);
    EXPECT_EQ(e.is_finite({2.0 / (1.0 + g), 0.0, 0.0}).verdict, FinVerdict::Finite);
    EXPECT_EQ(e.is_finite({1.0 / (1.0 + g), 0.0, 0.0}).verdict, FinVerdict::Inconclusive);
    EXPECT_THROW(e.induced_pressure({0.5 / (1.0 + g), 0.0, 0.0}), Error);
}

TEST(SolveP, TopologicalEntropyAtOrigin) {
    const PressureEngine& e = mp1();
    DomainFlag d = e.solve_p(0.0, 0.0);
    EXPECT_TRUE(d.in_N);
    EXPECT_NEAR(d.p_value, std::log(2.0), 1e-10);
    // at s = p the truncated subshift has pressure zero up to the omitted tail
    oracle::SubshiftThermo th = oracle::finite_subshift_thermo(sup_weight_graph(e.operator_data(), {0.0, 0.0, d.p_value}));
    EXPECT_NEAR(th.pressure, 0.0, 1e-10);
}

TEST(SolveP, ZeroPotentialIndependentOfQ) {
    const PressureEngine& e = mp1_const(0.0);
    double p0 = e.p(0.7, 0.0);
    EXPECT_NEAR(e.p(0.7, -2.0), p0, 1e-12);
    EXPECT_NEAR(e.p(0.7, 1.0), p0, 1e-12);
}

TEST(SolveP, UnitPotentialIsAffineInQ) {
    const PressureEngine& e = mp1_const(1.0);
    double p0 = e.p(0.3, 0.0);
    for (double q : {-1.0, -0.25, 0.2}) EXPECT_NEAR(e.p(0.3, q), p0 - q, 1e-10);
}

TEST(SolveP, ResidualIsCertified) {
    const PressureEngine& e = mp1();
    DomainFlag d = e.solve_p(0.6, -1.5);
    EXPECT_TRUE(d.in_N);
    EXPECT_TRUE(d.certified);
    EXPECT_LE(std::abs(d.residual), d.bracket.width());
    EXPECT_TRUE(d.p_bracket.contains(d.p_value));
}

TEST(SolveP, BoundaryAtDelta) {
    const MapModel m = builtin_manneville_pomeau(0.5);
    PressureEngine e(m, identity_potential(m));
    double delta = bowen_dimension(e).delta;
    DomainFlag below = e.solve_p(delta - 0.02, 0.0);
    EXPECT_TRUE(below.in_N);
    EXPECT_GT(below.p_value, 0.0);
    DomainFlag above = e.solve_p(delta + 0.02, 0.0);
    EXPECT_FALSE(above.in_N);
    EXPECT_TRUE(above.fallback);
    EXPECT_EQ(above.p_value, 0.0);
}

TEST(Derivatives, RuelleMatchesFiniteDifferences) {
    const PressureEngine& e = mp1();
    for (auto [b, q] : {std::pair{0.2, -1.0}, std::pair{0.6, -0.5}, std::pair{0.4, 0.0}}) {
        FirstDerivatives d = e.derivatives(b, q);
        EXPECT_TRUE(d.agree) << d.discrepancy;
        EXPECT_LT(d.db, 0.0);
    }
}

TEST(Derivatives, ZeroPotentialHasNoQDependence) {
    FirstDerivatives d = mp1_const(0.0).derivatives(0.5, -0.5);
    EXPECT_EQ(d.dq, 0.0);
    EXPECT_LT(d.db, 0.0);
}

TEST(SecondDerivative, DegenerateAndStrictlyConvexCases) {
    EXPECT_NEAR(mp1_const(0.0).second_derivative_q(0.5, 0.0).d2q, 0.0, 1e-6);
    EXPECT_NEAR(mp1_const(1.0).second_derivative_q(0.5, 0.0).d2q, 0.0, 1e-6);
    SecondDerivative s = mp1().second_derivative_q(0.5, 0.0);
    EXPECT_GT(s.d2q, 1e-4);
    EXPECT_FALSE(s.convexity_violation);
}

TEST(OneSided, InteriorPointIsDifferentiable) {
    const PressureEngine& e = mp1();
    OneSidedDerivatives o = e.one_sided_q_derivatives(0.5, -1.0);
    FirstDerivatives d = e.derivatives(0.5, -1.0);
    EXPECT_NEAR(o.right, d.dq, 1e-3);
    EXPECT_NEAR(o.left, d.dq, 1e-3);
}

TEST(OneSided, ZeroPotential) {
    OneSidedDerivatives o = mp1_const(0.0).one_sided_q_derivatives(0.5, 0.0);
    EXPECT_NEAR(o.right, 0.0, 1e-10);
    EXPECT_NEAR(o.left, 0.0, 1e-10);
}
