#include "parisian/claims.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <numeric>
#include <sstream>

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "parisian/numerics.hpp"

namespace parisian {

namespace {

constexpr double kTailMass = 1e-12;
constexpr double kPremiumTol = 1e-10;

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

namespace detail {

void warn(const std::string& message) {
    if (std::getenv("PARISIAN_QUIET") != nullptr) return;
    std::cerr << "parisian: warning: " << message << '\n';
}

}  // namespace detail

SeverityModel SeverityModel::exponential(double rate) {
    if (!finite_positive(rate)) {
        throw ValidationError("severity_rate", "exponential rate must be positive and finite");
    }
    SeverityModel m;
    m.kind_ = Kind::exponential;
    m.rate_ = rate;
    m.finalize();
    return m;
}

SeverityModel SeverityModel::gamma(double shape, double rate) {
    if (!finite_positive(shape) || !finite_positive(rate)) {
        throw ValidationError("severity_gamma", "gamma shape and rate must be positive and finite");
    }
    SeverityModel m;
    m.kind_ = Kind::gamma;
    m.shape_ = shape;
    m.rate_ = rate;
    m.finalize();
    return m;
}

SeverityModel SeverityModel::discrete(std::vector<Atom> atoms) {
    if (atoms.empty()) throw ValidationError("severity_atoms", "discrete severity needs at least one atom");
    double total = 0.0;
    for (const auto& a : atoms) {
        if (!finite_positive(a.value)) {
            throw ValidationError("severity_support", "atoms must be strictly positive (Y > 0 a.s.)");
        }
        if (!std::isfinite(a.prob) || a.prob < 0.0) {
            throw ValidationError("severity_prob", "atom probabilities must be non-negative");
        }
        total += a.prob;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "atom probabilities sum to " << total << ", not 1";
        throw ValidationError("severity_prob_sum", msg.str());
    }
    std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.value < b.value; });
    SeverityModel m;
    m.kind_ = Kind::discrete;
    m.atoms_ = std::move(atoms);
    m.finalize();
    return m;
}

void SeverityModel::finalize() {
    switch (kind_) {
        case Kind::exponential:
            mean_ = 1.0 / rate_;
            second_moment_ = 2.0 / (rate_ * rate_);
            upper_ = -std::log(kTailMass) / rate_;
            break;
        case Kind::gamma:
            mean_ = shape_ / rate_;
            second_moment_ = shape_ * (shape_ + 1.0) / (rate_ * rate_);
            upper_ = boost::math::gamma_q_inv(shape_, kTailMass) / rate_;
            break;
        case Kind::discrete: {
            mean_ = 0.0;
            second_moment_ = 0.0;
            cumulative_.clear();
            double acc = 0.0;
            for (const auto& a : atoms_) {
                mean_ += a.prob * a.value;
                second_moment_ += a.prob * a.value * a.value;
                acc += a.prob;
                cumulative_.push_back(acc);
            }
            upper_ = atoms_.back().value;
            break;
        }
    }
}

double SeverityModel::survival(double y) const {
    if (std::isnan(y) || y < 0.0) throw ValidationError("survival_domain", "survival requires y >= 0");
    switch (kind_) {
        case Kind::exponential:
            return std::exp(-rate_ * y);
        case Kind::gamma:
            return boost::math::gamma_q(shape_, rate_ * y);
        case Kind::discrete: {
            double s = 0.0;
            for (auto it = atoms_.rbegin(); it != atoms_.rend() && it->value > y; ++it) s += it->prob;
            return std::clamp(s, 0.0, 1.0);
        }
    }
    return 0.0;
}

double SeverityModel::pdf(double y) const {
    if (y < 0.0) return 0.0;
    switch (kind_) {
        case Kind::exponential:
            return rate_ * std::exp(-rate_ * y);
        case Kind::gamma:
            if (y == 0.0) return shape_ == 1.0 ? rate_ : (shape_ > 1.0 ? 0.0 : INFINITY);
            return boost::math::pdf(boost::math::gamma_distribution<double>(shape_, 1.0 / rate_), y);
        case Kind::discrete:
            break;
    }
    throw NumericalError("pdf: discrete severity has no density");
}

double SeverityModel::quantile(double p) const {
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("quantile_domain", "quantile requires p in [0, 1]");
    switch (kind_) {
        case Kind::exponential:
            return p >= 1.0 ? INFINITY : -std::log1p(-p) / rate_;
        case Kind::gamma:
            if (p <= 0.0) return 0.0;
            if (p >= 1.0) return INFINITY;
            return boost::math::gamma_p_inv(shape_, p) / rate_;
        case Kind::discrete: {
            const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), p - 1e-15);
            const auto idx = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()),
                                                   atoms_.size() - 1);
            return atoms_[idx].value;
        }
    }
    return 0.0;
}

double SeverityModel::mgf(double t) const {
    switch (kind_) {
        case Kind::exponential:
            if (t >= rate_) throw DomainError("mgf: exponential MGF diverges for t >= rate", rate_);
            return rate_ / (rate_ - t);
        case Kind::gamma:
            if (t >= rate_) throw DomainError("mgf: gamma MGF diverges for t >= rate", rate_);
            return std::pow(rate_ / (rate_ - t), shape_);
        case Kind::discrete: {
            double s = 0.0;
            for (const auto& a : atoms_) s += a.prob * std::exp(t * a.value);
            return s;
        }
    }
    return 0.0;
}

double SeverityModel::sample(Engine& engine) const {
    switch (kind_) {
        case Kind::exponential:
            return std::exponential_distribution<double>(rate_)(engine);
        case Kind::gamma:
            return std::gamma_distribution<double>(shape_, 1.0 / rate_)(engine);
        case Kind::discrete: {
            const double u = std::uniform_real_distribution<double>(0.0, 1.0)(engine);
            const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
            const auto idx = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()),
                                                   atoms_.size() - 1);
            return atoms_[idx].value;
        }
    }
    return 0.0;
}

double SeverityModel::expect(const std::function<double(double)>& g, std::span<const double> kinks,
                             double tol) const {
    if (kind_ == Kind::discrete) {
        double s = 0.0;
        for (const auto& a : atoms_) s += a.prob * g(a.value);
        return s;
    }
    auto integrand = [&](double y) { return g(y) * pdf(y); };
    return numerics::integrate(integrand, 0.0, upper_, tol, kinks);
}

double SeverityModel::integrate_survival(const std::function<double(double)>& g,
                                         std::span<const double> kinks, double tol) const {
    std::vector<double> cuts(kinks.begin(), kinks.end());
    if (kind_ == Kind::discrete) {
        for (const auto& a : atoms_) cuts.push_back(a.value);
        // S_Y is constant between atoms: integrate g on each layer.
        double total = 0.0;
        double lo = 0.0;
        double tail = 1.0;
        for (std::size_t k = 0; k < atoms_.size(); ++k) {
            const double hi = atoms_[k].value;
            if (hi > lo && tail > 0.0) total += tail * numerics::integrate(g, lo, hi, tol, cuts);
            tail = std::max(0.0, 1.0 - cumulative_[k]);
            lo = hi;
        }
        return total;
    }
    auto integrand = [&](double y) { return g(y) * survival(y); };
    return numerics::integrate(integrand, 0.0, upper_, tol, cuts);
}

std::string SeverityModel::describe() const {
    std::ostringstream out;
    out.precision(17);
    switch (kind_) {
        case Kind::exponential:
            out << "exponential(rate=" << rate_ << ")";
            break;
        case Kind::gamma:
            out << "gamma(shape=" << shape_ << ", rate=" << rate_ << ")";
            break;
        case Kind::discrete:
            out << "discrete(" << atoms_.size() << " atoms)";
            break;
    }
    return out.str();
}

Moments moments(const SeverityModel& model) { return {model.mean(), model.second_moment()}; }

double kappa(const MarketParams& p, const SeverityModel& model) {
    return (1.0 + p.theta) * p.lambda * model.mean() + 0.5 * p.eta * p.lambda * model.second_moment() - p.c;
}

ValidationReport validate(const MarketParams& p, const SeverityModel& model) {
    ValidationReport report;
    auto add = [&](const char* code, std::string message) { report.violations.push_back({code, std::move(message)}); };

    for (double v : {p.lambda, p.c, p.theta, p.eta, p.rho, p.beta}) {
        if (!std::isfinite(v)) {
            add("nonfinite", "all parameters must be finite");
            return report;
        }
    }
    if (p.lambda <= 0.0) add("lambda_positive", "lambda <= 0");
    if (p.rho <= 0.0) add("rho_positive", "rho <= 0");
    if (p.beta <= 0.0) add("beta_positive", "beta <= 0");
    if (p.theta < 0.0) add("theta_nonnegative", "theta < 0");
    if (p.eta < 0.0) add("eta_nonnegative", "eta < 0");
    if (p.theta == 0.0 && p.eta == 0.0) add("loadings_nonzero", "theta = 0 and eta = 0");

    const double net = p.lambda * model.mean();
    const double full = (1.0 + p.theta) * net + 0.5 * p.eta * p.lambda * model.second_moment();
    report.kappa = full - p.c;
    std::ostringstream msg;
    msg.precision(10);
    if (p.c <= net) {
        msg << "c <= lambda*E[Y] (net profit condition: c=" << p.c << ", lambda*E[Y]=" << net << ")";
        add("net_profit", msg.str());
        msg.str("");
    }
    if (p.c >= full) {
        msg << "c >= full-reinsurance premium (c=" << p.c << ", premium=" << full << ")";
        add("full_reinsurance_affordable", msg.str());
    }
    return report;
}

void require_valid(const MarketParams& params, const SeverityModel& model) {
    auto report = validate(params, model);
    if (!report.ok()) throw ValidationError(std::move(report.violations));
}

double reinsurance_premium_rate(const SeverityModel& model, const ClaimRetention& retention,
                                const MarketParams& params, std::span<const double> kinks) {
    std::size_t clipped = 0;
    auto ceded_cost = [&](double y) {
        double r = retention(y);
        if (r < 0.0 || r > y) {
            ++clipped;
            r = std::clamp(r, 0.0, y);
        }
        const double ceded = y - r;
        return (1.0 + params.theta) * ceded + 0.5 * params.eta * ceded * ceded;
    };
    const double rate = params.lambda * model.expect(ceded_cost, kinks, kPremiumTol);
    if (clipped > 0) {
        detail::warn("reinsurance_premium_rate: " + std::to_string(clipped) +
                     " retention values clipped to [0, y]");
    }
    return rate;
}

double controlled_drift(const SeverityModel& model, const ClaimRetention& retention,
                        const MarketParams& params, std::span<const double> kinks) {
    return params.c - reinsurance_premium_rate(model, retention, params, kinks);
}

}  // namespace parisian
