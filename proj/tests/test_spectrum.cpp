#include <cmath>

#include <gtest/gtest.h>

#include "thermo/oracle.hpp"
#include "thermo/spectrum.hpp"

using namespace thermo;

namespace {

struct Fixture {
    MapModel map;
    PressureEngine engine;
    BowenResult bowen;
    PlateauInfo info;

    Fixture(MapModel m, const PotentialSpec& phi, EngineSettings es = {})
        : map(m), engine(m, phi, es), bowen(bowen_dimension(engine)), info(plateau(engine, bowen.delta)) {}
};

const Fixture& mp05() {
    static const MapModel m = builtin_manneville_pomeau(0.5);
    static const Fixture s(m, identity_potential(m));
    return s;
}

// phi = 1 - x moves the parabolic value to the top so that A has a left flank
const Fixture& mp05_flipped() {
    static const MapModel m = builtin_manneville_pomeau(0.5);
    static const Fixture s(m, polynomial_potential(m, {1.0, -1.0}));
    return s;
}

}  // namespace

TEST(Bowen, FullBranchMapsHaveDimensionOne) {
    EXPECT_NEAR(mp05().bowen.delta, 1.0, 5e-3);
    const MapModel f = builtin_farey_like();
    PressureEngine e(f, identity_potential(f));
    BowenResult b = bowen_dimension(e);
    EXPECT_NEAR(b.delta, 1.0, 5e-3);
    EXPECT_TRUE(b.bracket.contains(b.delta));
}

TEST(Bowen, LinearizedZetaRoot) {
    oracle::LinearizedModel lm{2, 4.0, 1.0, 0};
    PressureEngine e(build_linearized_operator(2, 256, std::log(4.0), 1.0), {0.0, 0.0}, 1.0);
    BowenResult b = bowen_dimension(e);
    EXPECT_NEAR(b.delta, oracle::linearized_bowen_root(lm), 1e-6);
}

TEST(Plateau, MaxMeasureCaseIsHullWithDeltaMeasure) {
    const PlateauInfo& p = mp05().info;
    EXPECT_EQ(p.gamma_vs_threshold, 1);
    EXPECT_FALSE(p.boundary);
    EXPECT_EQ(p.plateau_case, PlateauCase::MaxMeasure);
    ASSERT_TRUE(p.mu_delta_phi.has_value());
    EXPECT_GT(*p.mu_delta_phi, 0.3);
    EXPECT_LT(*p.mu_delta_phi, 0.45);
    EXPECT_EQ(p.A.lo, 0.0);
    EXPECT_EQ(p.A.hi, *p.mu_delta_phi);
}

TEST(Plateau, NoMaxMeasureCaseIsParabolicValues) {
    const MapModel m = builtin_manneville_pomeau(2.0);
    PressureEngine e(m, identity_potential(m));
    PlateauInfo p = plateau(e, bowen_dimension(e).delta);
    EXPECT_EQ(p.gamma_vs_threshold, -1);
    EXPECT_EQ(p.plateau_case, PlateauCase::NoMaxMeasure);
    EXPECT_EQ(p.A, (Interval{0.0, 0.0}));
}

TEST(Plateau, FareyIsWholeInterval) {
    const MapModel f = builtin_farey_like();
    PressureEngine e(f, identity_potential(f));
    PlateauInfo p = plateau(e, bowen_dimension(e).delta);
    EXPECT_TRUE(p.boundary);  // gamma = 1 sits on 2/delta - 1
    EXPECT_EQ(p.plateau_case, PlateauCase::NoMaxMeasure);
    EXPECT_EQ(p.A, (Interval{0.0, 1.0}));
}

TEST(AlphaRange, ConstantPotential) {
    const MapModel m = builtin_manneville_pomeau(1.0);
    PressureEngine e(m, constant_potential(m, 0.7));
    AlphaRange r = alpha_range(e);
    EXPECT_NEAR(r.min_est, 0.7, 1e-12);
    EXPECT_NEAR(r.max_est, 0.7, 1e-12);
}

TEST(AlphaRange, FareyReachesBothEndpoints) {
    const MapModel f = builtin_farey_like();
    PressureEngine e(f, identity_potential(f));
    AlphaRange r = alpha_range(e);
    EXPECT_NEAR(r.min_est, 0.0, 1e-2);
    EXPECT_NEAR(r.max_est, 1.0, 1e-2);
}

TEST(AlphaRange, InnerEstimatesInsideUnitInterval) {
    AlphaRange r = alpha_range(mp05().engine);
    EXPECT_EQ(r.min_est, 0.0);
    EXPECT_GT(r.max_est, 0.9);
    EXPECT_LT(r.max_est, 1.0);
    EXPECT_LE(r.cycle_min, r.cycle_max);
}

TEST(BirkhoffPoint, InteriorOfPlateau) {
    SpectrumSolver s(mp05().engine, mp05().info);
    SpectrumPoint p = s.point(0.2);
    EXPECT_TRUE(p.on_plateau);
    EXPECT_EQ(p.b_alpha, mp05().bowen.delta);
    EXPECT_FALSE(p.q_alpha.has_value());
}

TEST(BirkhoffPoint, RightFlankHasNegativeQ) {
    const Fixture& s = mp05();
    SpectrumSolver solver(s.engine, s.info);
    SpectrumPoint p = solver.point(0.7);
    ASSERT_TRUE(p.ok()) << p.error;
    ASSERT_TRUE(p.q_alpha.has_value());
    EXPECT_LT(*p.q_alpha, 0.0);
    EXPECT_LT(p.b_alpha, s.bowen.delta);
    EXPECT_LE(p.res_p, 1e-5);
    EXPECT_LE(p.res_dq, 1e-4);
    EXPECT_LE(p.legendre, 1e-3);
}

TEST(BirkhoffPoint, LeftFlankHasPositiveQ) {
    const Fixture& s = mp05_flipped();
    SpectrumSolver solver(s.engine, s.info);
    SpectrumPoint p = solver.point(s.info.A.lo - 0.05);
    ASSERT_TRUE(p.ok()) << p.error;
    ASSERT_TRUE(p.q_alpha.has_value());
    EXPECT_GT(*p.q_alpha, 0.0);
    EXPECT_LT(p.b_alpha, s.bowen.delta);
    EXPECT_LE(p.legendre, 1e-3);
}

TEST(BirkhoffPoint, InnerProblemIsNonNegativeAndCoercive) {
    const Fixture& s = mp05();
    SpectrumSolver solver(s.engine, s.info);
    const double alpha = 0.6;
    SpectrumPoint p = solver.point(alpha);
    ASSERT_TRUE(p.ok()) << p.error;
    std::vector<double> vals;
    for (double q = -4.0; q <= 2.0; q += 0.5) {
        double v = s.engine.p(p.b_alpha, q) + q * alpha;
        EXPECT_GE(v, -1e-6) << q;
        vals.push_back(v);
    }
    EXPECT_GT(vals.front(), vals[1]);
    EXPECT_GT(vals.back(), vals[vals.size() - 2]);
}

TEST(BirkhoffPoint, MatchesCylinderShiftOracle) {
    const Fixture& s = mp05();
    SpectrumSolver solver(s.engine, s.info);
    oracle::CylinderShift cs = oracle::cylinder_shift(s.map, identity_potential(s.map), 10);
    for (double alpha : {0.5, 0.8}) {
        SpectrumPoint p = solver.point(alpha);
        ASSERT_TRUE(p.ok()) << p.error;
        oracle::SubshiftSpectrumPoint o = oracle::subshift_spectrum_point(cs.n_states, cs.edges, alpha, -5.0, 0.0);
        EXPECT_NEAR(p.b_alpha, o.b, 2e-2) << alpha;
    }
}

TEST(BirkhoffPoint, TruncationDoesNotLowerEstimates) {
    const MapModel m = builtin_manneville_pomeau(0.5);
    const PotentialSpec phi = identity_potential(m);
    EngineSettings small;
    small.n_max = 64;
    Fixture coarse(m, phi, small);
    SpectrumSolver a(coarse.engine, coarse.info), b(mp05().engine, mp05().info);
    for (double alpha : {0.45, 0.6}) EXPECT_GE(b.point(alpha).b_alpha, a.point(alpha).b_alpha - 1e-6);
}

TEST(SpectrumCurve, ShapeAroundPlateau) {
    const Fixture& s = mp05_flipped();
    SpectrumSolver solver(s.engine, s.info);
    std::vector<double> grid;
    for (double a = 0.2; a <= 0.95; a += 0.05) grid.push_back(a);
    auto pts = solver.curve(grid);
    CurveDiagnostics d = curve_diagnostics(pts, s.info);
    EXPECT_EQ(d.failures, 0);
    EXPECT_TRUE(d.increasing_left);
    EXPECT_TRUE(d.below_delta);
    for (const auto& p : pts) {
        if (s.info.A.contains(p.alpha))
            EXPECT_EQ(p.b_alpha, s.bowen.delta);
        else
            EXPECT_LT(p.b_alpha, s.bowen.delta);
    }
}

TEST(SpectrumCurve, DegeneratePotentialCollapsesToPoint) {
    const MapModel m = builtin_manneville_pomeau(0.5);
    Fixture s(m, constant_potential(m, 0.7));
    EXPECT_NEAR(s.info.A.lo, 0.7, 1e-12);
    EXPECT_NEAR(s.info.A.hi, 0.7, 1e-12);
    SpectrumSolver solver(s.engine, s.info);
    SpectrumPoint p = solver.point(0.7);
    EXPECT_TRUE(p.on_plateau);
    EXPECT_EQ(p.b_alpha, s.bowen.delta);
    EXPECT_NEAR(s.engine.second_derivative_q(0.5, 0.0).d2q, 0.0, 1e-6);
}

TEST(EndpointCheck, MaxMeasureCase) {
    EndpointCheck c = plateau_endpoint_check(mp05().engine, mp05().info);
    EXPECT_TRUE(c.passed) << c.right_error << " " << c.left_error;
    EXPECT_NEAR(c.derivs.right, -mp05().info.A.lo, 2e-2);
}

TEST(EndpointCheck, ConstantPotential) {
    const MapModel m = builtin_manneville_pomeau(0.5);
    Fixture s(m, constant_potential(m, 0.7));
    EndpointCheck c = plateau_endpoint_check(s.engine, s.info);
    EXPECT_NEAR(c.derivs.right, -0.7, 1e-6);
    EXPECT_NEAR(c.derivs.left, -0.7, 1e-6);
}

TEST(EndpointCheck, NoMaxMeasureCase) {
    const MapModel m = builtin_manneville_pomeau(2.0);
    Fixture s(m, identity_potential(m));
    EndpointCheck c = plateau_endpoint_check(s.engine, s.info);
    EXPECT_NEAR(c.derivs.right, -s.info.alpha_P_min, 2e-2);
    EXPECT_TRUE(c.passed);
}
