#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "parisian/claims.hpp"
#include "parisian/hjb.hpp"
#include "parisian/retention.hpp"

namespace parisian::sim {

/// ceil(9.3 / beta): the horizon at which exp(-beta T) drops below 1e-4.
double default_horizon(double beta);

struct SimConfig {
    double x0 = 0.0;
    RetentionRule rule = RetentionRule::full_retention();
    MarketParams params;
    SeverityModel model = SeverityModel::exponential(1.0);
    std::size_t n_paths = 10000;
    double horizon = 0.0;  ///< 0 selects default_horizon(beta)
    std::uint64_t seed = 1;
    unsigned threads = 0;  ///< 0: PARISIAN_THREADS, else hardware concurrency

    double effective_horizon() const { return horizon > 0.0 ? horizon : default_horizon(params.beta); }
};

struct PathOutcome {
    bool ruined = false;
    double ruin_time = std::numeric_limits<double>::infinity();
    std::size_t claims = 0;
};

/// Deterministic 64-bit mixer used to derive per-path streams.
std::uint64_t splitmix64(std::uint64_t x);

/// The two independent streams of one path: claim arrivals and sizes, and
/// Parisian clocks. Path i of a run with seed s always gets the same pair.
struct PathStreams {
    Engine claims;
    Engine clocks;
};
PathStreams path_streams(std::uint64_t seed, std::uint64_t path);

/// Fresh exponential(rho) clock at every excursion below zero.
struct FreshClock {
    double deadline(double t, Engine& engine, double rho) {
        return t + std::exponential_distribution<double>(1.0)(engine) / rho;
    }
};

/// Surplus dynamics of a rule: the real line is cut into cells, each with a
/// constant drift c - premium, and claims are retained according to the
/// cell's policy. Sign-dependent rules have two cells split at 0; tabulated
/// rules use node j's policy on [x_j, x_{j+1}), the first node below the
/// grid and the last node above it.
class Dynamics {
public:
    Dynamics(const RetentionRule& rule, const MarketParams& params, const SeverityModel& model);

    std::size_t cells() const noexcept { return drift_.size(); }
    std::size_t cell_of(double x) const;
    double lower(std::size_t c) const noexcept {
        return c == 0 ? -std::numeric_limits<double>::infinity() : breaks_[c - 1];
    }
    double upper(std::size_t c) const noexcept {
        return c == breaks_.size() ? std::numeric_limits<double>::infinity() : breaks_[c];
    }
    double drift(std::size_t c) const noexcept { return drift_[c]; }
    double retained(std::size_t c, double x, double y) const;

private:
    RetentionRule rule_;
    std::vector<double> breaks_;
    std::vector<double> drift_;
    std::vector<std::size_t> node_;  // tabulated rules: node of each cell
};

/// One path of the controlled surplus, simulated event by event: claim
/// arrivals, cell-boundary crossings, the Parisian deadline and the horizon.
/// Retention uses the pre-claim surplus. A point where the drift on the left
/// pushes up and the drift on the right pushes down holds the surplus until
/// the next claim.
template <class Clock>
PathOutcome simulate_path(const SimConfig& cfg, const Dynamics& dyn, PathStreams& rng, Clock& clock) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    const auto& p = cfg.params;
    const double horizon = cfg.effective_horizon();
    std::exponential_distribution<double> unit(1.0);

    PathOutcome out;
    double t = 0.0;
    double x = cfg.x0;
    std::size_t c = dyn.cell_of(x);
    bool below = x < 0.0;
    double deadline = below ? clock.deadline(t, rng.clocks, p.rho) : inf;
    double next_claim = unit(rng.claims) / p.lambda;

    for (;;) {
        double d = dyn.drift(c);
        if (d < 0.0 && x == dyn.lower(c)) {
            if (dyn.drift(c - 1) > 0.0) {
                d = 0.0;  // held at the boundary
            } else {
                --c;
                if (x == 0.0) {
                    below = true;
                    deadline = clock.deadline(t, rng.clocks, p.rho);
                }
                continue;
            }
        }
        double edge_time = inf;
        if (d > 0.0) edge_time = t + (dyn.upper(c) - x) / d;
        else if (d < 0.0) edge_time = t + (x - dyn.lower(c)) / -d;

        const double t_next = std::min({next_claim, edge_time, deadline, horizon});
        if (deadline <= t_next) {
            out.ruined = true;
            out.ruin_time = deadline;
            return out;
        }
        if (horizon <= t_next) return out;

        if (edge_time <= next_claim) {
            t = edge_time;
            if (d > 0.0) {
                x = dyn.upper(c);
                ++c;
                if (x == 0.0) {
                    below = false;
                    deadline = inf;
                }
            } else {
                x = dyn.lower(c);
            }
            continue;
        }

        x = std::clamp(x + d * (next_claim - t), dyn.lower(c), dyn.upper(c));
        t = next_claim;
        const double y = cfg.model.sample(rng.claims);
        x -= dyn.retained(c, x, y);
        ++out.claims;
        c = dyn.cell_of(x);
        if (!below && x < 0.0) {
            below = true;
            deadline = clock.deadline(t, rng.clocks, p.rho);
        } else if (below && x >= 0.0) {
            below = false;
            deadline = inf;
        }
        next_claim = t + unit(rng.claims) / p.lambda;
    }
}

struct Estimate {
    double mean = 0.0;
    double std_error = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    double bias_bound = 0.0;  ///< exp(-beta * horizon)
    std::size_t n_paths = 0;
    std::size_t n_ruined = 0;
    std::uint64_t seed = 0;
    double horizon = 0.0;
};

/// Per-path discounted ruin indicators exp(-beta K) 1{K <= horizon}, in path order.
std::vector<double> discounted_outcomes(const SimConfig& cfg, const Dynamics& dynamics);
std::vector<double> discounted_outcomes(const SimConfig& cfg);

/// Sample mean of exp(-beta K) 1{K <= horizon} with a normal 95% interval.
/// Paths may run on several threads; the result does not depend on the
/// thread count.
Estimate estimate(const SimConfig& cfg);
Estimate estimate(const SimConfig& cfg, const Dynamics& dynamics);

/// Estimate from already simulated per-path values.
Estimate summarize(std::span<const double> outcomes, const SimConfig& cfg);

struct ComparisonRow {
    double x = 0.0;
    double hjb_value = 0.0;
    Estimate optimal;         ///< rule extracted from the HJB solution
    Estimate full_retention;  ///< R(x, y) = y everywhere
    Estimate psi_bar_policy;  ///< full retention below 0, r_hat(.; gamma1) above
    double z_score = 0.0;     ///< (optimal.mean - hjb_value) / optimal.std_error
    bool dominates_full = false;
    bool dominates_psi_bar = false;
};

/// Cross-validates an HJB solution against Monte Carlo at the given points.
/// `base` supplies paths, horizon and seed; parameters and severity come from
/// the solution. Dominance holds when the optimal estimate exceeds a
/// reference estimate by at most 3 combined standard errors.
std::vector<ComparisonRow> compare(const hjb::HjbSolution& sol, std::span<const double> x_points,
                                   const SimConfig& base);

}  // namespace parisian::sim
