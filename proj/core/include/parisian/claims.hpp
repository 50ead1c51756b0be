#pragma once

#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "parisian/error.hpp"

namespace parisian {

/// Random engine used for all sampling in the library.
using Engine = std::mt19937_64;

/// Point mass of a discrete claim-size distribution.
struct Atom {
    double value;
    double prob;
};

struct Moments {
    double mean;
    double second_moment;
};

/// Claim-size distribution Y > 0 with finite first two moments.
///
/// Three families are supported: exponential(rate), gamma(shape, rate) and a
/// finite discrete law. Instances are immutable; construction validates the
/// parameters and throws ValidationError on failure.
class SeverityModel {
public:
    enum class Kind { exponential, gamma, discrete };

    static SeverityModel exponential(double rate);
    static SeverityModel gamma(double shape, double rate);
    /// Atoms are sorted by value; probabilities must sum to 1 within 1e-12.
    static SeverityModel discrete(std::vector<Atom> atoms);

    Kind kind() const noexcept { return kind_; }
    double rate() const noexcept { return rate_; }
    double shape() const noexcept { return shape_; }
    std::span<const Atom> atoms() const noexcept { return atoms_; }

    double mean() const noexcept { return mean_; }
    double second_moment() const noexcept { return second_moment_; }

    /// S_Y(y) = P(Y > y); y must be non-negative.
    double survival(double y) const;
    double cdf(double y) const { return 1.0 - survival(y); }
    /// Density of the continuous families. Throws for discrete models.
    double pdf(double y) const;
    /// Smallest y with F_Y(y) >= p.
    double quantile(double p) const;
    /// E exp(tY). Throws DomainError with boundary = rate when t >= rate for
    /// the parametric families.
    double mgf(double t) const;

    /// Upper truncation point for integrals against the law: the
    /// (1 - 1e-12)-quantile, or the largest atom.
    double upper_support() const noexcept { return upper_; }

    double sample(Engine& engine) const;

    /// E g(Y): weighted sum for discrete laws, adaptive quadrature of g * pdf
    /// on [0, upper_support()] otherwise. `kinks` are handed to the quadrature.
    double expect(const std::function<double(double)>& g, std::span<const double> kinks = {},
                  double tol = 1e-12) const;

    /// Integral of g(y) S_Y(y) over [0, upper_support()], with atoms as kinks
    /// for discrete laws.
    double integrate_survival(const std::function<double(double)>& g, std::span<const double> kinks,
                              double tol) const;

    std::string describe() const;

private:
    SeverityModel() = default;
    void finalize();

    Kind kind_ = Kind::exponential;
    double rate_ = 0.0;
    double shape_ = 1.0;
    std::vector<Atom> atoms_;
    std::vector<double> cumulative_;
    double mean_ = 0.0;
    double second_moment_ = 0.0;
    double upper_ = 0.0;
};

Moments moments(const SeverityModel& model);

/// Market and preference parameters of the reinsurance problem.
struct MarketParams {
    double lambda = 1.0;  ///< claim intensity
    double c = 1.2;       ///< premium income rate
    double theta = 0.5;   ///< proportional loading of the reinsurer
    double eta = 0.1;     ///< variance loading of the reinsurer
    double rho = 1.0;     ///< hazard rate of the Parisian clock
    double beta = 0.1;    ///< discount rate applied to the ruin time
};

/// kappa = (1+theta) lambda E Y + (eta/2) lambda E Y^2 - c: the excess of the
/// full-reinsurance premium over the premium income.
double kappa(const MarketParams& params, const SeverityModel& model);

struct ValidationReport {
    std::vector<Violation> violations;
    double kappa = 0.0;

    bool ok() const noexcept { return violations.empty(); }
};

/// Checks lambda E Y < c < (1+theta) lambda E Y + (eta/2) lambda E Y^2 and the
/// positivity constraints. Never throws.
ValidationReport validate(const MarketParams& params, const SeverityModel& model);

/// Throws ValidationError listing every violation.
void require_valid(const MarketParams& params, const SeverityModel& model);

/// Retained part of a claim of size y.
using ClaimRetention = std::function<double(double)>;

/// Mean-variance premium rate (1+theta) lambda E(Y-R) + (eta/2) lambda E(Y-R)^2.
/// Retentions outside [0, y] are clipped (with a warning).
double reinsurance_premium_rate(const SeverityModel& model, const ClaimRetention& retention,
                                const MarketParams& params, std::span<const double> kinks = {});

/// Drift of the controlled surplus, c minus the reinsurance premium rate.
double controlled_drift(const SeverityModel& model, const ClaimRetention& retention,
                        const MarketParams& params, std::span<const double> kinks = {});

namespace detail {
/// Library warning sink. Writes to stderr unless PARISIAN_QUIET is set.
void warn(const std::string& message);
}  // namespace detail

}  // namespace parisian
