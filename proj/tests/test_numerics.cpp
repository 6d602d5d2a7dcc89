#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "thermo/numerics.hpp"

using namespace thermo;

TEST(Interval, HullIncludeIntersect) {
    Interval a = Interval::hull(3.0, 1.0);
    EXPECT_EQ(a.lo, 1.0);
    EXPECT_EQ(a.hi, 3.0);
    a.include(5.0);
    EXPECT_EQ(a.hi, 5.0);
    Interval b = a.intersect({4.0, 9.0});
    EXPECT_EQ(b, (Interval{4.0, 5.0}));
    EXPECT_TRUE(a.intersect({6.0, 7.0}).empty());
    EXPECT_TRUE(a.widened(0.5).contains(a));
}

TEST(CompensatedSum, RecoversCancelledTerms) {
    CompensatedSum s;
    s.add(1e16);
    for (int k = 0; k < 1000; ++k) s.add(1.0);
    s.add(-1e16);
    EXPECT_EQ(s.value(), 1000.0);
}

TEST(LogSumExp, MatchesDirectSumAndSurvivesLargeArguments) {
    EXPECT_NEAR(log_sum_exp({0.0, std::log(3.0)}), std::log(4.0), 1e-15);
    EXPECT_NEAR(log_sum_exp({1000.0, 1000.0}), 1000.0 + std::log(2.0), 1e-12);
    EXPECT_EQ(log_sum_exp({}), -std::numeric_limits<double>::infinity());
}

TEST(Chebyshev, InterpolatesPolynomialsExactly) {
    ChebyshevGrid g({0.2, 0.7}, 8);
    auto f = [](double x) { return 1.0 - 2.0 * x + 3.0 * x * x * x * x; };
    for (double x : {0.21, 0.33, 0.5, 0.69}) {
        auto row = g.interpolation_row(x);
        double v = 0.0;
        for (int j = 0; j < g.size(); ++j) v += row[j] * f(g.nodes[j]);
        EXPECT_NEAR(v, f(x), 1e-13);
    }
}

TEST(RootFinding, BisectionAndNewtonAgree) {
    auto f = [](double x) { return x * x * x - 2.0; };
    double r = bisect(f, 0.0, 2.0, 1e-14);
    EXPECT_NEAR(r, std::cbrt(2.0), 1e-13);
    auto fdf = [](double x) { return std::make_pair(x * x * x - 2.0, 3.0 * x * x); };
    RootResult n = safeguarded_newton(fdf, 0.0, 2.0, 0.1, 1e-14);
    EXPECT_TRUE(n.converged);
    EXPECT_NEAR(n.root, std::cbrt(2.0), 1e-13);
    EXPECT_LT(n.iterations, 20);
}

TEST(RootFinding, NewtonStaysInBracketOnFlatFunction) {
    auto fdf = [](double x) { return std::make_pair(std::atan(x - 0.3), 1.0 / (1.0 + (x - 0.3) * (x - 0.3))); };
    RootResult n = safeguarded_newton(fdf, -50.0, 40.0, 39.0, 1e-13);
    EXPECT_TRUE(n.converged);
    EXPECT_NEAR(n.root, 0.3, 1e-12);
}

TEST(TailSums, PowerSeriesMatchesZeta) {
    TailModel t{1, 2.0, 0.0, 0.0, 1.0};
    TailSums s = tail_sums(t);
    EXPECT_NEAR(s.t0, std::numbers::pi * std::numbers::pi / 6.0 - 1.0, 1e-10);
    EXPECT_FALSE(std::isfinite(s.t1));  // sum k^{-1} diverges
}

TEST(TailSums, GeometricSeriesIsExact) {
    // w_k = e^{-(k-1)/2}, k >= 2
    TailModel t{1, 0.0, -0.5, 0.0, 1.0};
    TailSums s = tail_sums(t);
    double q = std::exp(-0.5);
    EXPECT_NEAR(s.t0, q / (1.0 - q), 1e-13);
}

TEST(TailSums, CriticalExponentDiverges) {
    TailModel t{4, 1.0, 0.0, 0.0, 1.0};
    EXPECT_FALSE(tail_sums(t).finite());
}

TEST(Perron, PowerIterationOnSmallMatrix) {
    // [[2,1],[1,2]] has Perron root 3 with vector (1,1)
    auto apply = [](const std::vector<double>& v, std::vector<double>& out) {
        out.resize(2);
        out[0] = 2 * v[0] + v[1];
        out[1] = v[0] + 2 * v[1];
    };
    PerronResult r = perron_iteration(apply, 2, 1e-14, 1000);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.value, 3.0, 1e-12);
    EXPECT_NEAR(r.vector[0] / r.vector[1], 1.0, 1e-10);
}
