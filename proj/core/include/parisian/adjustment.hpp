#pragma once

#include "parisian/claims.hpp"
#include "parisian/retention.hpp"

namespace parisian {

// Retention functions of the adjustment-coefficient problem above zero.

/// ln(1+theta)/gamma: claims below this size are fully retained by r_hat.
double r_hat_threshold(double gamma, double theta);

/// Unique R in [0, y] with (1+theta) + eta y - eta R - exp(gamma R) = 0.
/// Requires y >= r_hat_threshold(gamma, theta); throws ValidationError otherwise.
double r_c(double y, double gamma, double theta, double eta);

/// y below r_hat_threshold, r_c(y) above. Continuous and non-decreasing in y.
double r_hat(double y, double gamma, double theta, double eta);

/// Classical-model analogs of the adjustment coefficient.
struct AdjustmentCoefficients {
    double gamma1 = 0.0;  ///< decay rate of the value above zero
    double gamma2 = 0.0;  ///< approach rate to rho/(rho+beta) below zero
    MarketParams params;
    SeverityModel model;
};

/// h(g) = c + beta/g - lambda int_0^inf exp(g r_hat(y; g)) S_Y(y) dy.
double gamma1_residual(const MarketParams& params, const SeverityModel& model, double gamma);
/// rho + beta - c g + lambda (1 - M_Y(-g)).
double gamma2_residual(const MarketParams& params, const SeverityModel& model, double gamma);

double gamma1(const MarketParams& params, const SeverityModel& model);
double gamma2(const MarketParams& params, const SeverityModel& model);

/// Validates and solves both coefficients.
AdjustmentCoefficients solve_adjustment(const MarketParams& params, const SeverityModel& model);

/// Analytic bounds on the classical-model value function: psi_bar from above,
/// psi_underbar from below.
struct Bounds {
    AdjustmentCoefficients coefficients;

    double ceiling() const noexcept {
        return coefficients.params.rho / (coefficients.params.rho + coefficients.params.beta);
    }
};

double psi_bar(const Bounds& bounds, double x);
double psi_bar_slope(const Bounds& bounds, double x, bool left_limit = false);
double psi_underbar(const Bounds& bounds, double x);

/// psi_bar'(0+) - psi_bar'(0-), reported as a diagnostic.
double psi_bar_slope_jump(const Bounds& bounds);

/// b/(a+b) e^{az} + a/(a+b) e^{-bz} - 1, non-negative for positive a, b, z.
double convexity_gap(double a, double b, double z);

/// The feedback rule attached to psi_bar: full retention below zero and
/// r_hat(.; gamma1) at or above zero.
RetentionRule supersolution_policy(const AdjustmentCoefficients& coefficients);

}  // namespace parisian
