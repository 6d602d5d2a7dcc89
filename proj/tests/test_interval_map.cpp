#include <cmath>

#include <gtest/gtest.h>

#include "thermo/interval_map.hpp"

using namespace thermo;

TEST(MannevillePomeau, GammaIsInverseBeta) {
    EXPECT_DOUBLE_EQ(builtin_manneville_pomeau(0.5).gamma, 2.0);
    EXPECT_DOUBLE_EQ(builtin_manneville_pomeau(1.0).gamma, 1.0);
    EXPECT_DOUBLE_EQ(builtin_manneville_pomeau(2.0).gamma, 0.5);
}

TEST(MannevillePomeau, ParabolicFixedPointAtZero) {
    MapModel m = builtin_manneville_pomeau(0.5);
    ASSERT_EQ(m.parabolic(), std::vector<int>{0});
    const BranchSpec& b = m.branch(0);
    EXPECT_EQ(*b.fixed_point, 0.0);
    EXPECT_EQ(b.forward(0.0), 0.0);
    EXPECT_DOUBLE_EQ(b.derivative(0.0), 1.0);
    // the potential does not enter the map
    EXPECT_EQ(identity_potential(m).alpha(0), 0.0);
    EXPECT_EQ(geometric_potential(m).alpha(0), 0.0);
}

TEST(MannevillePomeau, RejectsNonPositiveBeta) {
    EXPECT_THROW(builtin_manneville_pomeau(0.0), Error);
    EXPECT_THROW(builtin_manneville_pomeau(-1.0), Error);
}

TEST(FareyLike, BothEndpointsParabolic) {
    MapModel m = builtin_farey_like();
    EXPECT_EQ(m.parabolic(), (std::vector<int>{0, 1}));
    EXPECT_DOUBLE_EQ(m.gamma, 1.0);
    for (double y : {0.0, 0.1, 0.5, 0.99, 1.0}) EXPECT_NEAR(m.branch(0).inverse(y), y / (1.0 + y), 1e-15);
    PotentialSpec phi = identity_potential(m);
    EXPECT_EQ(phi.alpha(0), 0.0);
    EXPECT_EQ(phi.alpha(1), 1.0);
}

TEST(Validation, MannevillePomeauPassesWithSlopeTwo) {
    MapModel m = builtin_manneville_pomeau(1.0);
    PotentialSpec phi = identity_potential(m);
    ValidationReport r = validate_map(m, {}, &phi);
    for (const auto& c : r.checks) EXPECT_TRUE(c.passed) << c.axiom << ": " << c.detail;
    EXPECT_NEAR(r.f1_slope, 2.0, 0.05);
    EXPECT_GE(r.f1_constant, 1.0);
}

TEST(Validation, FareyPassesWithSlopeTwo) {
    ValidationReport r = validate_map(builtin_farey_like());
    EXPECT_TRUE(r.all_passed());
    EXPECT_NEAR(r.f1_slope, 2.0, 0.05);
}

TEST(Validation, MannevillePomeauHalfHasSlopeThree) {
    ValidationReport r = validate_map(builtin_manneville_pomeau(0.5));
    EXPECT_TRUE(r.all_passed());
    EXPECT_NEAR(r.f1_slope, 3.0, 0.05);
}

TEST(Validation, OverlappingBranchesFailDisjointness) {
    MapModel m = builtin_manneville_pomeau(1.0);
    m.branches[1].domain.lo -= 0.1;
    ValidationReport r = validate_map(m);
    ASSERT_NE(r.find("NEI1"), nullptr);
    EXPECT_FALSE(r.find("NEI1")->passed);
}

TEST(Validation, InverseRoundTrip) {
    MapModel m = builtin_manneville_pomeau(0.5);
    for (const auto& b : m.branches)
        for (double y = 0.0; y <= 1.0; y += 0.0625) EXPECT_NEAR(b.forward(b.inverse(y)), y, 1e-12);
}

TEST(CustomMap, RationalBranchesReproduceFarey) {
    RationalPowerBranch b0;
    b0.domain = {0.0, 0.5};
    b0.d1 = -1.0;
    b0.parabolic_point = 0.0;
    RationalPowerBranch b1;
    b1.domain = {0.5, 1.0};
    b1.a0 = -1.0;
    b1.a1 = 2.0;
    b1.d0 = 0.0;
    b1.d1 = 1.0;
    b1.parabolic_point = 1.0;
    MapModel c = custom_map("farey", {b0, b1}, 1.0);
    MapModel f = builtin_farey_like();
    for (double x : {0.05, 0.2, 0.45}) {
        EXPECT_NEAR(c.branch(0).forward(x), f.branch(0).forward(x), 1e-15);
        EXPECT_NEAR(c.branch(0).derivative(x), f.branch(0).derivative(x), 1e-13);
    }
    for (double x : {0.55, 0.8, 0.99}) {
        EXPECT_NEAR(c.branch(1).forward(x), f.branch(1).forward(x), 1e-15);
        EXPECT_NEAR(c.branch(1).inverse(f.branch(1).forward(x)), x, 1e-12);
    }
    EXPECT_TRUE(validate_map(c).all_passed());
}

TEST(Potentials, ConstantAndPolynomial) {
    MapModel m = builtin_farey_like();
    PotentialSpec c = constant_potential(m, 2.5);
    EXPECT_TRUE(c.constant);
    EXPECT_EQ(c(0.3, 0), 2.5);
    PotentialSpec p = polynomial_potential(m, {1.0, 0.0, 2.0});
    EXPECT_FALSE(p.constant);
    EXPECT_DOUBLE_EQ(p(0.5, 1), 1.5);
    EXPECT_DOUBLE_EQ(p.alpha(1), 3.0);
}
