#include "etreg/plant.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace etreg;

namespace {
Vec vec(std::initializer_list<double> xs) {
    Vec v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index k = 0;
    for (double x : xs) v(k++) = x;
    return v;
}
}  // namespace

TEST(Lorenz, OriginIsEquilibrium) {
    const auto d = lorenz_derivatives(Vec::Zero(2), 0.0, vec({0.3, -0.9, 1, 0.5}), 0.0);
    EXPECT_EQ(d.dz1, 0.0);
    EXPECT_EQ(d.dz2, 0.0);
    EXPECT_EQ(d.dy, 0.0);
}

TEST(Lorenz, NominalHandEvaluation) {
    const auto d = lorenz_derivatives(vec({1, 1}), 1.0, Vec::Zero(4), 0.0);
    EXPECT_DOUBLE_EQ(d.dz1, 0.0);
    EXPECT_DOUBLE_EQ(d.dz2, -7.0);
    EXPECT_DOUBLE_EQ(d.dy, -1.0);
}

TEST(Lorenz, GainRange) {
    LorenzPlant p;
    EXPECT_DOUBLE_EQ(p.b(vec({0, 0, 0, 1})), 3.0);
    EXPECT_DOUBLE_EQ(p.b(vec({0, 0, 0, -1})), 1.0);
}

TEST(Lorenz, AffineInInput) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ud(-1, 1);
    for (int trial = 0; trial < 50; ++trial) {
        const Vec z = vec({ud(rng), ud(rng)});
        const Vec w = vec({ud(rng), ud(rng), ud(rng), ud(rng)});
        const double y = ud(rng), u = 5 * ud(rng);
        const double slope = (lorenz_derivatives(z, y, w, u).dy - lorenz_derivatives(z, y, w, 0).dy) / u;
        EXPECT_NEAR(slope, 2.0 + w(3), 1e-12);
        EXPECT_EQ(lorenz_derivatives(z, y, w, u).dz1, lorenz_derivatives(z, y, w, 0).dz1);
    }
}

TEST(Lorenz, InterfaceMatchesFreeFunction) {
    LorenzPlant p;
    const Vec z = vec({0.4, -0.3}), w = vec({0.4, -0.7, 0.6, -0.2}), v = vec({0.88, -0.48});
    const auto d = lorenz_derivatives(z, 0.9, w, 0.0);
    EXPECT_EQ(p.f(z, 0.9, v, w), vec({d.dz1, d.dz2}));
    EXPECT_EQ(p.g(z, 0.9, v, w), d.dy);
    EXPECT_EQ(p.q(v, w), 0.88);
}

TEST(GainBounds, Examples) {
    LorenzPlant p;
    auto b = p.gain_bounds({Vec::Ones(4)});
    EXPECT_DOUBLE_EQ(b.b_m, 1.0);
    EXPECT_DOUBLE_EQ(b.b_M, 3.0);
    b = p.gain_bounds({Vec::Zero(4)});
    EXPECT_DOUBLE_EQ(b.b_m, 2.0);
    EXPECT_DOUBLE_EQ(b.b_M, 2.0);
    try {
        p.gain_bounds({vec({1, 1, 1, 2.5})});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NonPositiveGain);
    }
}

TEST(Admissibility, SignConditionsOverBox) {
    LorenzPlant p;
    EXPECT_TRUE(p.admissibility_issues({Vec::Ones(4)}).empty());
    EXPECT_EQ(p.admissibility_issues({vec({6.5, 1, 1, 1})}).size(), 1u);
    // z1-subsystem with y = 0 decays for every corner of the box
    for (double w1 : {-1.0, 1.0}) {
        const auto d = lorenz_derivatives(vec({1, 0}), 0.0, vec({w1, 0, 0, 0}), 0.0);
        EXPECT_LT(d.dz1, 0.0);
    }
    EXPECT_THROW(make_plant("duffing"), std::invalid_argument);
    EXPECT_EQ(make_plant("lorenz")->kind(), "lorenz");
}
