#pragma once

#include "parisian/claims.hpp"

namespace parisian {

enum class Side { left, right };

/// Closed-form solution of the control problem when the surplus is replaced
/// by its two-moment Brownian approximation.
///
/// The value function decays like exp(-gamma1_tilde x) above zero and
/// approaches rho/(rho+beta) like exp(gamma2_tilde x) below zero; the two
/// branches paste in C^1 at the origin.
struct DiffusionSolution {
    double gamma1_tilde = 0.0;
    double gamma2_tilde = 0.0;
    MarketParams params;
    SeverityModel model;

    /// rho / (rho + beta): the value as x -> -inf.
    double ceiling() const noexcept { return params.rho / (params.rho + params.beta); }
};

/// Positive root of (lambda/2) E[Y^2] g^2 + (c - lambda E Y) g - (rho + beta) = 0,
/// from the radical.
double diffusion_gamma2(const MarketParams& params, const SeverityModel& model);

/// Residual whose positive root is gamma1_tilde:
///   (c - lambda E Y) + beta/g - lambda g * int_0^inf min((theta + eta y)/(eta + g), y) S_Y(y) dy.
double diffusion_gamma1_residual(const MarketParams& params, const SeverityModel& model, double gamma);

/// Validates the parameters, evaluates gamma2_tilde in closed form and
/// root-finds gamma1_tilde (bracket search starts at gamma2_tilde).
/// Throws ValidationError or a NumericalError on bracket failure.
DiffusionSolution solve_diffusion(const MarketParams& params, const SeverityModel& model);

double value_tilde(const DiffusionSolution& sol, double x);
/// First derivative; `side` selects the one-sided limit at x = 0.
double value_tilde_slope(const DiffusionSolution& sol, double x, Side side = Side::right);
double value_tilde_curvature(const DiffusionSolution& sol, double x, Side side = Side::right);

/// Optimal feedback retention: y below zero, min((theta + eta y)/(eta + gamma1_tilde), y) otherwise.
double retention_tilde(const DiffusionSolution& sol, double x, double y);

/// Claim size above which reinsurance is bought when x >= 0 (theta / gamma1_tilde).
double retention_tilde_crossover(const DiffusionSolution& sol);

/// Signed left-minus-right of the diffusion HJB equation at x != 0, with
/// analytic derivatives of the value function and the minimizing retention.
double hjb_residual_tilde(const DiffusionSolution& sol, double x);

}  // namespace parisian
