#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "parisian/claims.hpp"

namespace parisian {
namespace {

bool has_code(const ValidationReport& r, const std::string& code) {
    return std::any_of(r.violations.begin(), r.violations.end(), [&](const Violation& v) { return v.code == code; });
}

TEST(Moments, Exponential) {
    const auto m = moments(SeverityModel::exponential(1.0));
    EXPECT_DOUBLE_EQ(m.mean, 1.0);
    EXPECT_DOUBLE_EQ(m.second_moment, 2.0);
}

TEST(Moments, PointMass) {
    const auto m = moments(SeverityModel::discrete({{2.0, 1.0}}));
    EXPECT_DOUBLE_EQ(m.mean, 2.0);
    EXPECT_DOUBLE_EQ(m.second_moment, 4.0);
}

TEST(Moments, GammaMatchesDensityQuadrature) {
    const auto model = SeverityModel::gamma(2.0, 1.0);
    const double mean = oracle::trapezoid([&](double y) { return y * model.pdf(y); }, 0.0, 80.0, 400000);
    const double second = oracle::trapezoid([&](double y) { return y * y * model.pdf(y); }, 0.0, 80.0, 400000);
    EXPECT_NEAR(model.mean(), mean, 1e-8);
    EXPECT_NEAR(model.second_moment(), second, 1e-8);
    EXPECT_NEAR(model.mean(), 2.0, 1e-12);
    EXPECT_NEAR(model.second_moment(), 6.0, 1e-12);
}

TEST(Severity, RejectsInvalidParameters) {
    EXPECT_THROW(SeverityModel::exponential(0.0), ValidationError);
    EXPECT_THROW(SeverityModel::gamma(-1.0, 1.0), ValidationError);
    EXPECT_THROW(SeverityModel::discrete({}), ValidationError);
    EXPECT_THROW(SeverityModel::discrete({{1.0, 0.5}, {2.0, 0.4}}), ValidationError);
    EXPECT_THROW(SeverityModel::discrete({{0.0, 1.0}}), ValidationError);
}

TEST(Survival, Examples) {
    const auto e = SeverityModel::exponential(1.0);
    EXPECT_DOUBLE_EQ(e.survival(0.0), 1.0);
    EXPECT_NEAR(e.survival(1.0), std::exp(-1.0), 1e-15);
    const auto d = SeverityModel::discrete({{1.0, 0.5}, {3.0, 0.5}});
    EXPECT_DOUBLE_EQ(d.survival(2.0), 0.5);
}

TEST(Survival, NonIncreasingAndRightContinuous) {
    const auto d = SeverityModel::discrete({{1.0, 0.25}, {2.5, 0.5}, {4.0, 0.25}});
    for (const auto& model : {SeverityModel::exponential(0.7), SeverityModel::gamma(2.5, 1.3), d}) {
        double prev = 1.0;
        for (int i = 0; i <= 1000; ++i) {
            const double s = model.survival(0.01 * i);
            EXPECT_LE(s, prev + 1e-15);
            prev = s;
        }
    }
    for (const auto& a : d.atoms()) EXPECT_DOUBLE_EQ(d.survival(a.value), d.survival(a.value + 1e-12));
    EXPECT_DOUBLE_EQ(d.survival(1.0), 0.75);
    EXPECT_DOUBLE_EQ(d.survival(1.0 - 1e-12), 1.0);
}

TEST(Mgf, Examples) {
    const auto e = SeverityModel::exponential(1.0);
    EXPECT_DOUBLE_EQ(e.mgf(0.0), 1.0);
    const double g = 1.403247;
    const double numeric = oracle::trapezoid([&](double y) { return std::exp(-g * y) * std::exp(-y); }, 0.0, 60.0, 2000000);
    EXPECT_NEAR(e.mgf(-g), 1.0 / (1.0 + g), 1e-14);
    EXPECT_NEAR(e.mgf(-g), numeric, 1e-9);
}

TEST(Mgf, DivergesAtRate) {
    const auto e = SeverityModel::exponential(1.0);
    try {
        e.mgf(1.0);
        FAIL() << "expected a divergence error";
    } catch (const DomainError& err) {
        EXPECT_DOUBLE_EQ(err.boundary, 1.0);
    }
    EXPECT_THROW(SeverityModel::gamma(2.0, 3.0).mgf(3.5), DomainError);
}

TEST(Mgf, ConvexWithUnitValueAtZero) {
    const auto d = SeverityModel::discrete({{0.5, 0.3}, {2.0, 0.7}});
    for (const auto& model : {SeverityModel::exponential(2.0), SeverityModel::gamma(3.0, 2.0), d}) {
        EXPECT_DOUBLE_EQ(model.mgf(0.0), 1.0);
        const double h = 0.01;
        for (double t = -5.0; t < 1.5; t += 0.05) {
            const double second = model.mgf(t - h) - 2.0 * model.mgf(t) + model.mgf(t + h);
            EXPECT_GE(second, -1e-12) << "t=" << t;
        }
    }
}

TEST(Mgf, GammaMatchesClosedForm) {
    const auto g = SeverityModel::gamma(2.5, 1.5);
    for (double t : {-3.0, -0.5, 0.7, 1.2}) EXPECT_NEAR(g.mgf(t), std::pow(1.5 / (1.5 - t), 2.5), 1e-12);
}

TEST(Quantile, InvertsCdf) {
    const auto e = SeverityModel::exponential(2.0);
    for (double p : {0.1, 0.5, 0.9, 0.999}) EXPECT_NEAR(e.quantile(p), -std::log1p(-p) / 2.0, 1e-12);
    const auto g = SeverityModel::gamma(2.0, 1.0);
    for (double p : {0.05, 0.5, 0.95}) EXPECT_NEAR(g.cdf(g.quantile(p)), p, 1e-12);
    const auto d = SeverityModel::discrete({{1.0, 0.5}, {3.0, 0.5}});
    EXPECT_DOUBLE_EQ(d.quantile(0.5), 1.0);
    EXPECT_DOUBLE_EQ(d.quantile(0.51), 3.0);
}

TEST(Sampling, MeanWithinStatisticalError) {
    Engine engine(7);
    for (const auto& model : {SeverityModel::exponential(1.0), SeverityModel::gamma(2.0, 1.0),
                              SeverityModel::discrete({{1.0, 0.5}, {3.0, 0.5}})}) {
        const int n = 200000;
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += model.sample(engine);
        const double var = model.second_moment() - model.mean() * model.mean();
        EXPECT_NEAR(s / n, model.mean(), 4.0 * std::sqrt(var / n));
    }
}

TEST(Expect, KinkedIntegrandMatchesTrapezoid) {
    const auto e = SeverityModel::exponential(1.0);
    auto g = [](double y) { return std::min(0.6 * y, 1.0); };
    const double kinks[] = {1.0 / 0.6};
    const double oracle_value =
        oracle::trapezoid_split([&](double y) { return g(y) * std::exp(-y); }, 0.0, 60.0, 2000000, {1.0 / 0.6});
    EXPECT_NEAR(e.expect(g, kinks), oracle_value, 1e-10);
}

TEST(Premium, Examples) {
    MarketParams p;
    const auto e = SeverityModel::exponential(1.0);
    EXPECT_NEAR(reinsurance_premium_rate(e, [](double y) { return y; }, p), 0.0, 1e-15);
    EXPECT_NEAR(reinsurance_premium_rate(e, [](double) { return 0.0; }, p), 1.6, 1e-10);
    const auto d = SeverityModel::discrete({{2.0, 1.0}});
    EXPECT_NEAR(reinsurance_premium_rate(d, [](double y) { return 0.5 * y; }, p), 1.55, 1e-14);
}

TEST(Premium, BoundedByFullReinsurance) {
    MarketParams p;
    p.theta = 0.3;
    p.eta = 0.2;
    p.lambda = 1.7;
    const auto d = SeverityModel::discrete({{0.5, 0.2}, {1.0, 0.5}, {4.0, 0.3}});
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (const auto& model : {SeverityModel::exponential(1.0), SeverityModel::gamma(2.0, 1.5), d}) {
        const double full = reinsurance_premium_rate(model, [](double) { return 0.0; }, p);
        for (int k = 0; k < 20; ++k) {
            const double a = u(rng);
            const double cap = 3.0 * u(rng);
            auto r = [=](double y) { return std::min(a * y, cap); };
            const double kinks[] = {cap / a};
            const double prem = reinsurance_premium_rate(model, r, p, kinks);
            EXPECT_GE(prem, 0.0);
            EXPECT_LE(prem, full + 1e-12);
            EXPECT_GT(prem, 0.0);  // R < Y with positive probability
        }
        EXPECT_NEAR(reinsurance_premium_rate(model, [](double y) { return y; }, p), 0.0, 1e-15);
    }
}

TEST(Premium, ClipsInadmissibleRetention) {
    MarketParams p;
    const auto d = SeverityModel::discrete({{2.0, 1.0}});
    EXPECT_NEAR(reinsurance_premium_rate(d, [](double y) { return 2.0 * y; }, p), 0.0, 1e-15);
    EXPECT_NEAR(reinsurance_premium_rate(d, [](double) { return -1.0; }, p),
                reinsurance_premium_rate(d, [](double) { return 0.0; }, p), 1e-15);
}

TEST(Discrete, AgreesWithFiniteSums) {
    const std::vector<Atom> atoms{{0.3, 0.1}, {1.1, 0.4}, {2.7, 0.35}, {6.0, 0.15}};
    const auto d = SeverityModel::discrete(atoms);
    MarketParams p;
    p.lambda = 1.3;
    p.theta = 0.4;
    p.eta = 0.25;
    double mean = 0.0;
    double second = 0.0;
    double prem = 0.0;
    auto r = [](double y) { return std::min(0.8 * y, 1.5); };
    for (const auto& a : atoms) {
        mean += a.prob * a.value;
        second += a.prob * a.value * a.value;
        const double ceded = a.value - r(a.value);
        prem += a.prob * ((1.0 + p.theta) * ceded + 0.5 * p.eta * ceded * ceded);
    }
    prem *= p.lambda;
    EXPECT_NEAR(d.mean(), mean, 1e-12);
    EXPECT_NEAR(d.second_moment(), second, 1e-12);
    EXPECT_NEAR(reinsurance_premium_rate(d, r, p), prem, 1e-12);
    EXPECT_NEAR(d.mgf(-0.7), [&] {
        double s = 0.0;
        for (const auto& a : atoms) s += a.prob * std::exp(-0.7 * a.value);
        return s;
    }(), 1e-12);
    const double kap = (1.0 + p.theta) * p.lambda * mean + 0.5 * p.eta * p.lambda * second - p.c;
    EXPECT_NEAR(kappa(p, d), kap, 1e-12);
}

TEST(Validate, ReferenceParametersAreValid) {
    const auto r = validate(MarketParams{}, SeverityModel::exponential(1.0));
    EXPECT_TRUE(r.ok());
    EXPECT_NEAR(r.kappa, 0.4, 1e-12);
    EXPECT_NO_THROW(require_valid(MarketParams{}, SeverityModel::exponential(1.0)));
}

TEST(Validate, NetProfitViolation) {
    MarketParams p;
    p.c = 0.9;
    const auto r = validate(p, SeverityModel::exponential(1.0));
    EXPECT_FALSE(r.ok());
    EXPECT_TRUE(has_code(r, "net_profit"));
    try {
        require_valid(p, SeverityModel::exponential(1.0));
        FAIL();
    } catch (const ValidationError& e) {
        ASSERT_EQ(e.violations().size(), 1u);
        EXPECT_EQ(e.violations()[0].code, "net_profit");
    }
}

TEST(Validate, FullReinsuranceAffordableViolation) {
    MarketParams p;
    p.c = 2.0;
    const auto r = validate(p, SeverityModel::exponential(1.0));
    EXPECT_TRUE(has_code(r, "full_reinsurance_affordable"));
}

TEST(Validate, PositivityConstraints) {
    MarketParams p;
    p.lambda = -1.0;
    p.rho = 0.0;
    p.beta = 0.0;
    const auto r = validate(p, SeverityModel::exponential(1.0));
    EXPECT_TRUE(has_code(r, "lambda_positive"));
    EXPECT_TRUE(has_code(r, "rho_positive"));
    EXPECT_TRUE(has_code(r, "beta_positive"));
    MarketParams q;
    q.theta = 0.0;
    q.eta = 0.0;
    EXPECT_TRUE(has_code(validate(q, SeverityModel::exponential(1.0)), "loadings_nonzero"));
}

TEST(Drift, IsIncomeMinusPremium) {
    MarketParams p;
    const auto e = SeverityModel::exponential(1.0);
    EXPECT_NEAR(controlled_drift(e, [](double y) { return y; }, p), 1.2, 1e-15);
    EXPECT_NEAR(controlled_drift(e, [](double) { return 0.0; }, p), -kappa(p, e), 1e-10);
}

}  // namespace
}  // namespace parisian
