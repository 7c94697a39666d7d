#include "etreg/linalg.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using etreg::Mat;
namespace la = etreg::linalg;

TEST(Expm, RotationClosedForm) {
    Mat S(2, 2);
    S << 0, 1, -1, 0;
    for (double t : {0.0, 0.3, std::numbers::pi / 2, 7.5, 40.0}) {
        const Mat E = la::expm(S * t);
        EXPECT_NEAR(E(0, 0), std::cos(t), 1e-12);
        EXPECT_NEAR(E(0, 1), std::sin(t), 1e-12);
        EXPECT_NEAR(E(1, 0), -std::sin(t), 1e-12);
        EXPECT_NEAR(E(1, 1), std::cos(t), 1e-12);
    }
}

TEST(Expm, AgreesWithTaylorOracle) {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 20; ++trial) {
        Mat A(5, 5);
        for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = nd(rng);
        A *= 1.0 + trial * 0.3;
        const Mat ref = oracle::expm_taylor(A);
        EXPECT_LT((la::expm(A) - ref).norm() / ref.norm(), 1e-11) << "trial " << trial;
    }
}

TEST(Expm, ZeroAndEmpty) {
    EXPECT_TRUE(la::expm(Mat::Zero(3, 3)).isApprox(Mat::Identity(3, 3)));
    EXPECT_EQ(la::expm(Mat(0, 0)).size(), 0);
}

TEST(Linalg, SpectralNormMatchesPowerIteration) {
    Mat A(3, 3);
    A << 1, 2, 0, -1, 3, 1, 0.5, 0, -2;
    EXPECT_NEAR(la::spectral_norm(A), oracle::spectral_norm_power(A), 1e-12);
}

TEST(Linalg, Companion) {
    const std::vector<double> row{-9, 0, -10, 0};
    const Mat C = la::companion(row);
    Mat expected(4, 4);
    expected << 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, -9, 0, -10, 0;
    EXPECT_EQ(C, expected);
}
