#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "thermo/crosscheck.hpp"
#include "thermo/oracle.hpp"
#include "thermo/pressure_engine.hpp"
#include "thermo/spectrum.hpp"

using namespace thermo;
using namespace thermo::oracle;

TEST(Linearized, DilogarithmValue) {
    LinearizedModel m{2, 1.0, 1.0, 0};
    const double l2 = std::log(2.0);
    const double exact = std::log(2.0 * (std::numbers::pi * std::numbers::pi / 12.0 - l2 * l2 / 2.0));
    EXPECT_NEAR(linearized_pressure(m, 1.0, l2), exact, 1e-12);
}

TEST(Linearized, ZetaTwo) {
    for (int k : {1, 2, 3}) {
        LinearizedModel m{k, 1.0, 1.0, 0};
        EXPECT_NEAR(linearized_pressure(m, 1.0, 0.0), std::log(k * std::numbers::pi * std::numbers::pi / 6.0), 1e-12);
    }
}

TEST(Linearized, DecreasesToMinusInfinityInS) {
    LinearizedModel m{2, 1.0, 1.0, 0};
    double prev = linearized_pressure(m, 0.5, 0.1);
    for (double s : {0.5, 2.0, 10.0, 100.0}) {
        double v = linearized_pressure(m, 0.5, s);
        EXPECT_LT(v, prev);
        prev = v;
    }
    EXPECT_LT(prev, -90.0);
}

TEST(Linearized, DivergentParametersRejected) {
    LinearizedModel m{2, 1.0, 1.0, 0};
    EXPECT_THROW(linearized_pressure(m, 0.25, 0.0), Error);
    EXPECT_THROW(linearized_pressure(m, 1.0, -0.1), Error);
}

TEST(Linearized, EngineBracketContainsOracle) {
    LinearizedModel m{2, 1.0, 1.0, 0};
    PressureEngine e(build_linearized_operator(2, 256, 0.0, 1.0), {0.0, 0.0}, 1.0);
    for (auto [b, s] : {std::pair{1.0, 0.3}, std::pair{1.5, 0.05}, std::pair{0.8, 1.0}}) {
        PressureBracket br = e.induced_pressure({b, 0.0, s});
        EXPECT_TRUE(br.contains(linearized_pressure(m, b, s))) << b << " " << s;
    }
}

TEST(FiniteSubshift, SingleCycleGivesMeanWeight) {
    FiniteGraph g{3, {{{1, 0.3}}, {{2, -0.1}}, {{0, 0.4}}}};
    SubshiftThermo t = finite_subshift_thermo(g);
    EXPECT_NEAR(t.pressure, 0.2, 1e-12);
    EXPECT_NEAR(t.entropy, 0.0, 1e-12);
}

TEST(FiniteSubshift, UniformFullShift) {
    const int m = 5;
    FiniteGraph g;
    g.n = m;
    g.out.resize(m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) g.out[i].push_back({j, 0.0});
    SubshiftThermo t = finite_subshift_thermo(g);
    EXPECT_NEAR(t.pressure, std::log(m), 1e-12);
    EXPECT_NEAR(t.entropy, std::log(m), 1e-12);
    for (double p : t.stationary) EXPECT_NEAR(p, 1.0 / m, 1e-12);
}

TEST(FiniteSubshift, ReducibleGraphRejected) {
    FiniteGraph g{2, {{{0, 0.0}, {1, 0.0}}, {{1, 0.0}}}};
    try {
        finite_subshift_thermo(g);
        FAIL() << "expected a structural error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Structural);
    }
}

TEST(FiniteSubshift, AgreesWithEngineLowerBound) {
    const MapModel m = builtin_manneville_pomeau(1.0);
    PressureEngine e(m, identity_potential(m));
    for (Query qy : {Query{0.5, 0.0, 0.5}, Query{0.3, -1.0, 1.5}, Query{0.0, 0.0, 0.0}}) {
        SubshiftThermo t = finite_subshift_thermo(sup_weight_graph(e.operator_data(), qy));
        Interval cb = coarse_bracket(e.operator_data(), qy, e.operator_settings());
        EXPECT_NEAR(t.pressure, cb.lo, 1e-9);
    }
}

TEST(Cycles, ConstantValues) {
    std::vector<CycleEdge> e{{0, 1, 0.6, 2.0}, {1, 0, 0.3, 1.0}, {1, 1, 0.1, 1.0}};
    CycleExtremes c = exhaustive_cycle_means(2, e, 4);
    EXPECT_NEAR(c.min, 0.1 / 1.0, 1e-15);
    std::vector<CycleEdge> k{{0, 1, 1.4, 2.0}, {1, 0, 0.7, 1.0}, {1, 1, 0.7, 1.0}};
    CycleExtremes d = exhaustive_cycle_means(2, k, 4);
    EXPECT_NEAR(d.min, 0.7, 1e-15);
    EXPECT_NEAR(d.max, 0.7, 1e-15);
}

TEST(Cycles, TwoDisjointLoops) {
    std::vector<CycleEdge> e{{0, 0, 0.2, 1.0}, {1, 1, 1.4, 2.0}};
    CycleExtremes c = exhaustive_cycle_means(2, e, 3);
    EXPECT_DOUBLE_EQ(c.min, 0.2);
    EXPECT_DOUBLE_EQ(c.max, 0.7);
    EXPECT_EQ(c.cycles, 2);
}

TEST(Cycles, MatchAlphaRangeOnSmallAlphabet) {
    const MapModel m = builtin_manneville_pomeau(1.0);
    EngineSettings es;
    es.n_max = 32;
    PressureEngine e(m, identity_potential(m), es);
    AlphaRange r = alpha_range(e);
    const OperatorData& op = e.operator_data();
    const int n = static_cast<int>(op.states.size());
    CycleExtremes hi = exhaustive_cycle_means(n, cycle_edges(op, true), 3);
    CycleExtremes lo = exhaustive_cycle_means(n, cycle_edges(op, false), 3);
    EXPECT_NEAR(hi.max, r.cycle_max, 1e-10);
    EXPECT_NEAR(lo.min, r.cycle_min, 1e-10);
}

TEST(Histogram, ConstantPotentialConcentrates) {
    const MapModel m = builtin_manneville_pomeau(1.0);
    Histogram h = orbit_birkhoff_histogram(m, constant_potential(m, 0.7), 100, 500);
    long total = 0;
    for (long c : h.counts) total += c;
    EXPECT_EQ(*std::max_element(h.counts.begin(), h.counts.end()), total);
    EXPECT_TRUE(h.mode_bin().contains(0.7));
    EXPECT_NEAR(h.mean, 0.7, 1e-12);
}

TEST(Histogram, AcipModeInsidePlateau) {
    const MapModel m = builtin_manneville_pomeau(0.5);
    const PotentialSpec phi = identity_potential(m);
    PressureEngine e(m, phi);
    PlateauInfo info = plateau(e, bowen_dimension(e).delta);
    Histogram h = orbit_birkhoff_histogram(m, phi, 500, 20000);
    Interval mode = h.mode_bin();
    EXPECT_FALSE(mode.intersect(info.A).empty()) << mode.lo << " " << mode.hi << " vs A.hi " << info.A.hi;
    EXPECT_NEAR(h.mean, *info.mu_delta_phi, 1e-2);
}

TEST(Histogram, InfiniteMeasureDriftsToParabolicValue) {
    const MapModel m = builtin_manneville_pomeau(2.0);
    const PotentialSpec phi = identity_potential(m);
    Histogram shorter = orbit_birkhoff_histogram(m, phi, 300, 1000);
    Histogram longer = orbit_birkhoff_histogram(m, phi, 300, 20000);
    EXPECT_LT(longer.mean, shorter.mean);
    EXPECT_GT(longer.counts[0], shorter.counts[0]);
}

TEST(Histogram, DeterministicGivenSeed) {
    const MapModel m = builtin_farey_like();
    const PotentialSpec phi = identity_potential(m);
    Histogram a = orbit_birkhoff_histogram(m, phi, 50, 300, 20, 0.0, 1.0, 99);
    Histogram b = orbit_birkhoff_histogram(m, phi, 50, 300, 20, 0.0, 1.0, 99);
    EXPECT_EQ(a.counts, b.counts);
    EXPECT_EQ(a.mean, b.mean);
}

TEST(CylinderShift, EntropyAndGeometricPressure) {
    const MapModel m = builtin_manneville_pomeau(0.5);
    CylinderShift cs = cylinder_shift(m, identity_potential(m), 8);
    EXPECT_NEAR(state_pressure(cs.n_states, cs.edges, 0.0, 0.0, 0.0), std::log(2.0), 1e-10);
    EXPECT_NEAR(state_pressure(cs.n_states, cs.edges, 1.0, 0.0, 0.0), 0.0, 5e-2);
}
