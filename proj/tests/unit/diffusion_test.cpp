#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "parisian/diffusion.hpp"

namespace parisian {
namespace {

const SeverityModel kExp1 = SeverityModel::exponential(1.0);

TEST(Diffusion, Gamma2TildeReferenceSet) {
    const auto sol = solve_diffusion(MarketParams{}, kExp1);
    const double radical = (std::sqrt(0.2 * 0.2 + 2.0 * 1.1 * 2.0) - 0.2) / 2.0;
    const double bisection = oracle::quadratic_root(0.5 * 2.0, 0.2, 1.1);
    EXPECT_NEAR(sol.gamma2_tilde, radical, 1e-14);
    EXPECT_NEAR(sol.gamma2_tilde, bisection, 1e-12);
    EXPECT_NEAR(sol.gamma2_tilde, 0.953565, 1e-5);
    const double g = sol.gamma2_tilde;
    EXPECT_LT(std::abs(g * g + 0.2 * g - 1.1), 1e-12);
}

TEST(Diffusion, Gamma2TildeDiscountLimit) {
    MarketParams p;
    p.beta = 1e-12;
    const double g = diffusion_gamma2(p, kExp1);
    EXPECT_NEAR(g, oracle::quadratic_root(1.0, 0.2, p.rho), 1e-10);
}

TEST(Diffusion, Gamma1TildeSolvesTrapezoidResidual) {
    const MarketParams p;
    const auto sol = solve_diffusion(p, kExp1);
    const double g = sol.gamma1_tilde;
    const double kink = p.theta / g;
    const double integral = oracle::trapezoid_split(
        [&](double y) { return std::min((p.theta + p.eta * y) / (p.eta + g), y) * std::exp(-y); }, 0.0, 45.0,
        1000000, {kink});
    const double residual = (p.c - p.lambda) + p.beta / g - p.lambda * g * integral;
    EXPECT_LT(std::abs(residual), 1e-9);
    EXPECT_LT(std::abs(diffusion_gamma1_residual(p, kExp1, g)), 1e-10);
}

TEST(Diffusion, ValueLimitsAndContinuity) {
    const auto sol = solve_diffusion(MarketParams{}, kExp1);
    const double at0 = sol.ceiling() * sol.gamma2_tilde / (sol.gamma1_tilde + sol.gamma2_tilde);
    EXPECT_NEAR(value_tilde(sol, 0.0), at0, 1e-15);
    EXPECT_NEAR(value_tilde(sol, -1e-13), at0, 1e-12);
    EXPECT_NEAR(value_tilde(sol, 200.0), 0.0, 1e-15);
    EXPECT_NEAR(value_tilde(sol, -200.0), sol.ceiling(), 1e-15);
}

TEST(Diffusion, SmoothPasting) {
    const auto sol = solve_diffusion(MarketParams{}, kExp1);
    const double left = value_tilde_slope(sol, 0.0, Side::left);
    const double right = value_tilde_slope(sol, 0.0, Side::right);
    EXPECT_LT(std::abs(left - right), 1e-10);
    const double expected =
        -sol.ceiling() * sol.gamma1_tilde * sol.gamma2_tilde / (sol.gamma1_tilde + sol.gamma2_tilde);
    EXPECT_NEAR(right, expected, 1e-14);
}

TEST(Diffusion, StrictlyDecreasing) {
    const auto sol = solve_diffusion(MarketParams{}, kExp1);
    double prev = value_tilde(sol, -20.0);
    for (double x = -19.9; x <= 20.0; x += 0.1) {
        const double v = value_tilde(sol, x);
        EXPECT_LT(v, prev);
        prev = v;
    }
}

TEST(Diffusion, ResidualExamples) {
    const auto sol = solve_diffusion(MarketParams{}, kExp1);
    EXPECT_LT(std::abs(hjb_residual_tilde(sol, -0.5)), 1e-8);
    EXPECT_LT(std::abs(hjb_residual_tilde(sol, 1.0)), 1e-8);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (int k = 0; k < 100; ++k) {
        const double x = u(rng);
        EXPECT_LT(std::abs(hjb_residual_tilde(sol, x)), 1e-8) << "x=" << x;
    }
}

TEST(Diffusion, ResidualForGammaSeverity) {
    MarketParams p;
    p.c = 2.6;
    p.theta = 0.4;
    const auto sol = solve_diffusion(p, SeverityModel::gamma(2.0, 1.0));
    for (double x : {-3.0, -0.2, 0.3, 4.0}) EXPECT_LT(std::abs(hjb_residual_tilde(sol, x)), 1e-8);
}

TEST(Diffusion, RetentionExamples) {
    const MarketParams p;
    const auto sol = solve_diffusion(p, kExp1);
    for (double y : {0.1, 1.0, 5.0}) EXPECT_DOUBLE_EQ(retention_tilde(sol, -1.0, y), y);
    const double cross = retention_tilde_crossover(sol);
    EXPECT_NEAR(cross, p.theta / sol.gamma1_tilde, 1e-15);
    EXPECT_DOUBLE_EQ(retention_tilde(sol, 0.0, 0.5 * cross), 0.5 * cross);
    const double y = 3.0 * cross;
    EXPECT_NEAR(retention_tilde(sol, 0.0, y), (p.theta + p.eta * y) / (p.eta + sol.gamma1_tilde), 1e-15);
}

TEST(Diffusion, ExcessOfLossWithoutVarianceLoading) {
    MarketParams p;
    p.eta = 0.0;
    p.c = 1.3;
    const auto sol = solve_diffusion(p, kExp1);
    const double d = p.theta / sol.gamma1_tilde;
    for (double y : {0.2, 0.9 * d, d, 2.0 * d, 10.0}) EXPECT_NEAR(retention_tilde(sol, 1.0, y), std::min(d, y), 1e-15);
}

TEST(Diffusion, BruteForceMinimizerMatchesRetention) {
    const MarketParams p;
    const auto sol = solve_diffusion(p, kExp1);
    for (double x : {0.0, 0.7, 3.0}) {
        const double v1 = value_tilde_slope(sol, x);
        const double v2 = value_tilde_curvature(sol, x);
        for (double y : {0.1, 0.5, 0.8, 0.86, 0.9, 1.0}) {
            auto obj = [&](double r) {
                return (p.theta * r + p.eta * y * r - 0.5 * p.eta * r * r) * v1 + 0.5 * r * r * v2;
            };
            const double brute = oracle::grid_argmin(obj, 0.0, y, 1000000);
            EXPECT_NEAR(brute, retention_tilde(sol, x, y), 1e-6) << "x=" << x << " y=" << y;
        }
    }
}

TEST(Diffusion, NonDecreasingInRho) {
    MarketParams lo;
    lo.rho = 0.5;
    MarketParams hi;
    hi.rho = 2.0;
    const auto a = solve_diffusion(lo, kExp1);
    const auto b = solve_diffusion(hi, kExp1);
    for (double x = -10.0; x <= 10.0; x += 0.05) EXPECT_LE(value_tilde(a, x), value_tilde(b, x) + 1e-15);
}

TEST(Diffusion, RejectsInvalidParameters) {
    MarketParams p;
    p.c = 0.9;
    EXPECT_THROW(solve_diffusion(p, kExp1), ValidationError);
}

}  // namespace
}  // namespace parisian
