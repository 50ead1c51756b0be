#include "parisian/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>

#include "parisian/adjustment.hpp"
#include "parisian/error.hpp"

namespace parisian::sim {

double default_horizon(double beta) { return std::ceil(9.3 / beta); }

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

PathStreams path_streams(std::uint64_t seed, std::uint64_t path) {
    const std::uint64_t base = splitmix64(seed);
    return {Engine(splitmix64(base ^ (2 * path))), Engine(splitmix64(base ^ (2 * path + 1)))};
}

Dynamics::Dynamics(const RetentionRule& rule, const MarketParams& params, const SeverityModel& model)
    : rule_(rule) {
    if (rule.kind() != RetentionRule::Kind::tabulated) {
        breaks_ = {0.0};
        for (bool below : {true, false}) {
            const auto kinks = rule.regime_kinks(below);
            drift_.push_back(controlled_drift(model, rule.regime(below), params, kinks));
        }
        return;
    }

    const auto xs = rule.x_grid();
    const auto ys = rule.y_grid();
    std::vector<double> node_drift(xs.size());
    for (std::size_t j = 0; j < xs.size(); ++j) {
        node_drift[j] = controlled_drift(
            model, [&](double y) { return rule.retained_at_node(j, y); }, params, ys);
    }
    breaks_.assign(xs.begin(), xs.end());
    if (!std::binary_search(breaks_.begin(), breaks_.end(), 0.0)) {
        breaks_.insert(std::upper_bound(breaks_.begin(), breaks_.end(), 0.0), 0.0);
    }
    // Cell c covers [breaks[c-1], breaks[c]) and uses the last node at or
    // below its left edge.
    for (std::size_t c = 0; c <= breaks_.size(); ++c) {
        std::size_t j = 0;
        if (c > 0) {
            const auto it = std::upper_bound(xs.begin(), xs.end(), breaks_[c - 1]);
            j = it == xs.begin() ? 0 : static_cast<std::size_t>(it - xs.begin()) - 1;
        }
        node_.push_back(j);
        drift_.push_back(node_drift[j]);
    }
}

std::size_t Dynamics::cell_of(double x) const {
    return static_cast<std::size_t>(std::upper_bound(breaks_.begin(), breaks_.end(), x) - breaks_.begin());
}

double Dynamics::retained(std::size_t c, double x, double y) const {
    if (node_.empty()) return rule_.retained(x, y);
    return rule_.retained_at_node(node_[c], y);
}

namespace {

unsigned worker_count(unsigned requested, std::size_t n_paths) {
    unsigned n = requested;
    if (n == 0) {
        if (const char* env = std::getenv("PARISIAN_THREADS")) n = static_cast<unsigned>(std::strtoul(env, nullptr, 10));
    }
    if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
    return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(1, n_paths / 1000)));
}

}  // namespace

std::vector<double> discounted_outcomes(const SimConfig& cfg, const Dynamics& dynamics) {
    std::vector<double> out(cfg.n_paths, 0.0);
    auto run = [&](std::size_t lo, std::size_t hi) {
        FreshClock clock;
        for (std::size_t i = lo; i < hi; ++i) {
            auto rng = path_streams(cfg.seed, i);
            const auto path = simulate_path(cfg, dynamics, rng, clock);
            if (path.ruined) out[i] = std::exp(-cfg.params.beta * path.ruin_time);
        }
    };
    const unsigned workers = worker_count(cfg.threads, cfg.n_paths);
    if (workers <= 1) {
        run(0, cfg.n_paths);
        return out;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (cfg.n_paths + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t lo = std::min(cfg.n_paths, w * chunk);
        const std::size_t hi = std::min(cfg.n_paths, lo + chunk);
        pool.emplace_back(run, lo, hi);
    }
    for (auto& t : pool) t.join();
    return out;
}

std::vector<double> discounted_outcomes(const SimConfig& cfg) {
    return discounted_outcomes(cfg, Dynamics(cfg.rule, cfg.params, cfg.model));
}

Estimate summarize(std::span<const double> outcomes, const SimConfig& cfg) {
    if (outcomes.size() < 2) throw ValidationError("n_paths", "at least two paths are needed");
    const double n = static_cast<double>(outcomes.size());
    double sum = 0.0;
    std::size_t ruined = 0;
    for (double v : outcomes) {
        sum += v;
        if (v > 0.0) ++ruined;
    }
    const double mean = sum / n;
    double ss = 0.0;
    for (double v : outcomes) ss += (v - mean) * (v - mean);
    Estimate e;
    e.mean = mean;
    e.std_error = std::sqrt(ss / (n - 1.0) / n);
    e.ci_lo = mean - 1.959963984540054 * e.std_error;
    e.ci_hi = mean + 1.959963984540054 * e.std_error;
    e.horizon = cfg.effective_horizon();
    e.bias_bound = std::exp(-cfg.params.beta * e.horizon);
    e.n_paths = outcomes.size();
    e.n_ruined = ruined;
    e.seed = cfg.seed;
    return e;
}

Estimate estimate(const SimConfig& cfg, const Dynamics& dynamics) {
    if (cfg.n_paths < 2) throw ValidationError("n_paths", "at least two paths are needed");
    return summarize(discounted_outcomes(cfg, dynamics), cfg);
}

Estimate estimate(const SimConfig& cfg) { return estimate(cfg, Dynamics(cfg.rule, cfg.params, cfg.model)); }

std::vector<ComparisonRow> compare(const hjb::HjbSolution& sol, std::span<const double> x_points,
                                   const SimConfig& base) {
    const auto& pb = *sol.problem;
    SimConfig cfg = base;
    cfg.params = pb.params();
    cfg.model = pb.model();

    const auto optimal = hjb::extract_policy(sol);
    const auto full = RetentionRule::full_retention();
    const auto psi_policy = supersolution_policy(solve_adjustment(pb.params(), pb.model()));
    const Dynamics dyn_opt(optimal, cfg.params, cfg.model);
    const Dynamics dyn_full(full, cfg.params, cfg.model);
    const Dynamics dyn_psi(psi_policy, cfg.params, cfg.model);

    auto combined = [](const Estimate& a, const Estimate& b) {
        return std::sqrt(a.std_error * a.std_error + b.std_error * b.std_error);
    };

    std::vector<ComparisonRow> rows;
    for (double x : x_points) {
        cfg.x0 = x;
        ComparisonRow row;
        row.x = x;
        row.hjb_value = sol.value_at(x);
        cfg.rule = optimal;
        row.optimal = estimate(cfg, dyn_opt);
        cfg.rule = full;
        row.full_retention = estimate(cfg, dyn_full);
        cfg.rule = psi_policy;
        row.psi_bar_policy = estimate(cfg, dyn_psi);
        row.z_score = row.optimal.std_error > 0.0 ? (row.optimal.mean - row.hjb_value) / row.optimal.std_error : 0.0;
        row.dominates_full =
            row.optimal.mean <= row.full_retention.mean + 3.0 * combined(row.optimal, row.full_retention);
        row.dominates_psi_bar =
            row.optimal.mean <= row.psi_bar_policy.mean + 3.0 * combined(row.optimal, row.psi_bar_policy);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace parisian::sim
