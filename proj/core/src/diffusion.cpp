#include "parisian/diffusion.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "parisian/numerics.hpp"

namespace parisian {

namespace {

constexpr double kIntegralTol = 1e-13;

double crossover(const MarketParams& p, double gamma) { return p.theta / gamma; }

// Retention min((theta + eta y)/(eta + gamma), y) above zero.
double capped_retention(const MarketParams& p, double gamma, double y) {
    return std::min((p.theta + p.eta * y) / (p.eta + gamma), y);
}

}  // namespace

double diffusion_gamma2(const MarketParams& p, const SeverityModel& model) {
    const double drift = p.c - p.lambda * model.mean();
    const double vol2 = p.lambda * model.second_moment();
    return (std::sqrt(drift * drift + 2.0 * (p.rho + p.beta) * vol2) - drift) / vol2;
}

double diffusion_gamma1_residual(const MarketParams& p, const SeverityModel& model, double gamma) {
    const std::array<double, 1> kinks{crossover(p, gamma)};
    const double integral = model.integrate_survival(
        [&](double y) { return capped_retention(p, gamma, y); }, kinks, kIntegralTol);
    return (p.c - p.lambda * model.mean()) + p.beta / gamma - p.lambda * gamma * integral;
}

DiffusionSolution solve_diffusion(const MarketParams& params, const SeverityModel& model) {
    require_valid(params, model);
    DiffusionSolution sol{0.0, diffusion_gamma2(params, model), params, model};

    auto g = [&](double gamma) { return diffusion_gamma1_residual(params, model, gamma); };
    const double start = sol.gamma2_tilde;
    const auto dir = g(start) > 0.0 ? numerics::Direction::up : numerics::Direction::down;
    const auto bracket = numerics::auto_bracket(g, start, dir);
    sol.gamma1_tilde = numerics::find_root({g, bracket.lo, bracket.hi, 1e-15 * std::max(1.0, bracket.hi), 300});
    return sol;
}

double value_tilde(const DiffusionSolution& sol, double x) {
    const double g1 = sol.gamma1_tilde;
    const double g2 = sol.gamma2_tilde;
    if (x < 0.0) return sol.ceiling() * (1.0 - g1 / (g1 + g2) * std::exp(g2 * x));
    return sol.ceiling() * g2 / (g1 + g2) * std::exp(-g1 * x);
}

double value_tilde_slope(const DiffusionSolution& sol, double x, Side side) {
    const double g1 = sol.gamma1_tilde;
    const double g2 = sol.gamma2_tilde;
    const double scale = sol.ceiling() * g1 * g2 / (g1 + g2);
    if (x < 0.0 || (x == 0.0 && side == Side::left)) return -scale * std::exp(g2 * x);
    return -scale * std::exp(-g1 * x);
}

double value_tilde_curvature(const DiffusionSolution& sol, double x, Side side) {
    const double g1 = sol.gamma1_tilde;
    const double g2 = sol.gamma2_tilde;
    const double scale = sol.ceiling() * g1 * g2 / (g1 + g2);
    if (x < 0.0 || (x == 0.0 && side == Side::left)) return -scale * g2 * std::exp(g2 * x);
    return scale * g1 * std::exp(-g1 * x);
}

double retention_tilde(const DiffusionSolution& sol, double x, double y) {
    if (y <= 0.0) return 0.0;
    if (x < 0.0) return y;
    return capped_retention(sol.params, sol.gamma1_tilde, y);
}

double retention_tilde_crossover(const DiffusionSolution& sol) { return crossover(sol.params, sol.gamma1_tilde); }

double hjb_residual_tilde(const DiffusionSolution& sol, double x) {
    const auto& p = sol.params;
    const auto& model = sol.model;
    const double v = value_tilde(sol, x);
    const double vx = value_tilde_slope(sol, x);
    const double vxx = value_tilde_curvature(sol, x);
    const double k = kappa(p, model);

    double er = 0.0, eyr = 0.0, er2 = 0.0;
    if (x < 0.0) {
        er = model.mean();
        eyr = model.second_moment();
        er2 = model.second_moment();
    } else {
        const std::array<double, 1> kinks{crossover(p, sol.gamma1_tilde)};
        auto r = [&](double y) { return capped_retention(p, sol.gamma1_tilde, y); };
        er = model.expect(r, kinks, kIntegralTol);
        eyr = model.expect([&](double y) { return y * r(y); }, kinks, kIntegralTol);
        er2 = model.expect([&](double y) { const double q = r(y); return q * q; }, kinks, kIntegralTol);
    }
    const double lhs = p.beta * v + (x < 0.0 ? p.rho * (v - 1.0) : 0.0);
    const double rhs = -k * vx + p.lambda * ((p.theta * er + p.eta * eyr - 0.5 * p.eta * er2) * vx + 0.5 * er2 * vxx);
    return lhs - rhs;
}

}  // namespace parisian
