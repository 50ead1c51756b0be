#include "parisian/adjustment.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "parisian/numerics.hpp"

namespace parisian {

namespace {

constexpr double kOuterTol = 1e-12;
constexpr double kQuadTol = 1e-12;

}  // namespace

double r_hat_threshold(double gamma, double theta) { return std::log1p(theta) / gamma; }

double r_c(double y, double gamma, double theta, double eta) {
    const double threshold = r_hat_threshold(gamma, theta);
    if (!(gamma > 0.0) || y < threshold - 1e-12 * std::max(1.0, threshold)) {
        throw ValidationError("r_c_domain", "r_c requires gamma > 0 and y >= ln(1+theta)/gamma");
    }
    if (eta == 0.0) return std::min(threshold, y);
    auto f = [=](double r) { return (1.0 + theta) + eta * y - eta * r - std::exp(gamma * r); };
    if (f(y) >= 0.0) return y;  // y sits on the threshold
    return numerics::find_root({f, 0.0, y, 1e-15 * std::max(1.0, y), 200});
}

double r_hat(double y, double gamma, double theta, double eta) {
    if (y <= 0.0) return 0.0;
    if (y < r_hat_threshold(gamma, theta)) return y;
    return r_c(y, gamma, theta, eta);
}

double gamma1_residual(const MarketParams& p, const SeverityModel& model, double gamma) {
    const double y0 = r_hat_threshold(gamma, p.theta);
    // On the r_c branch exp(gamma R) = (1+theta) + eta (y - R).
    auto exp_retained = [&](double y) {
        if (y < y0) return std::exp(gamma * y);
        const double r = r_c(y, gamma, p.theta, p.eta);
        return (1.0 + p.theta) + p.eta * (y - r);
    };

    double integral = 0.0;
    if (model.kind() == SeverityModel::Kind::discrete) {
        // S_Y is a step function: closed form on the full-retention branch,
        // quadrature on the r_c branch.
        double lo = 0.0;
        double tail = 1.0;
        for (const auto& atom : model.atoms()) {
            const double hi = atom.value;
            if (hi > lo) {
                const double split = std::clamp(y0, lo, hi);
                double layer = 0.0;
                if (split > lo) layer += (std::exp(gamma * split) - std::exp(gamma * lo)) / gamma;
                if (hi > split) layer += numerics::integrate(exp_retained, split, hi, kQuadTol);
                integral += tail * layer;
            }
            tail = std::max(0.0, tail - atom.prob);
            lo = hi;
        }
    } else {
        const std::array<double, 1> kinks{y0};
        integral = model.integrate_survival(exp_retained, kinks, kQuadTol);
    }
    return p.c + p.beta / gamma - p.lambda * integral;
}

double gamma2_residual(const MarketParams& p, const SeverityModel& model, double gamma) {
    return p.rho + p.beta - p.c * gamma + p.lambda * (1.0 - model.mgf(-gamma));
}

namespace {

double solve_positive_root(const numerics::ScalarFunction& f, double start, double tol) {
    const auto dir = f(start) > 0.0 ? numerics::Direction::up : numerics::Direction::down;
    const auto bracket = numerics::auto_bracket(f, start, dir);
    if (bracket.lo == bracket.hi) return bracket.lo;
    return numerics::find_root({f, bracket.lo, bracket.hi, tol * std::max(1.0, bracket.hi), 300});
}

}  // namespace

double gamma1(const MarketParams& params, const SeverityModel& model) {
    auto h = [&](double g) { return gamma1_residual(params, model, g); };
    return solve_positive_root(h, 1.0 / model.mean(), kOuterTol);
}

double gamma2(const MarketParams& params, const SeverityModel& model) {
    auto f = [&](double g) { return gamma2_residual(params, model, g); };
    return solve_positive_root(f, 1.0 / model.mean(), 1e-15);
}

AdjustmentCoefficients solve_adjustment(const MarketParams& params, const SeverityModel& model) {
    require_valid(params, model);
    return {gamma1(params, model), gamma2(params, model), params, model};
}

double psi_bar(const Bounds& b, double x) {
    const double g1 = b.coefficients.gamma1;
    const double g2 = b.coefficients.gamma2;
    if (x < 0.0) return b.ceiling() * (1.0 - g1 / (g1 + g2) * std::exp(g2 * x));
    return b.ceiling() * g2 / (g1 + g2) * std::exp(-g1 * x);
}

double psi_bar_slope(const Bounds& b, double x, bool left_limit) {
    const double g1 = b.coefficients.gamma1;
    const double g2 = b.coefficients.gamma2;
    if (x < 0.0 || (x == 0.0 && left_limit)) return -b.ceiling() * g1 * g2 / (g1 + g2) * std::exp(g2 * x);
    return -b.ceiling() * g1 * g2 / (g1 + g2) * std::exp(-g1 * x);
}

double psi_underbar(const Bounds& b, double x) {
    if (x >= -1.0) return 0.0;
    return b.ceiling() * -std::expm1(b.coefficients.gamma2 * (x + 1.0));
}

double psi_bar_slope_jump(const Bounds& b) { return psi_bar_slope(b, 0.0, false) - psi_bar_slope(b, 0.0, true); }

double convexity_gap(double a, double b, double z) {
    return b / (a + b) * std::expm1(a * z) + a / (a + b) * std::expm1(-b * z);
}

RetentionRule supersolution_policy(const AdjustmentCoefficients& coef) {
    const double g = coef.gamma1;
    const double theta = coef.params.theta;
    const double eta = coef.params.eta;
    auto above = RetentionRule::stationary([=](double y) { return r_hat(y, g, theta, eta); },
                                           {r_hat_threshold(g, theta)}, "r_hat");
    return RetentionRule::two_regime(RetentionRule::full_retention(), above);
}

}  // namespace parisian
