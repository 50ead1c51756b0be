// Acceptance run: one PASS/FAIL line per criterion, exit status = number of
// failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "parisian/adjustment.hpp"
#include "parisian/diffusion.hpp"
#include "parisian/hjb.hpp"
#include "parisian/simulator.hpp"

using namespace parisian;

namespace {

using Clock = std::chrono::steady_clock;

struct Verdict {
    bool pass = true;
    std::string detail;

    void check(bool ok, const std::string& what) {
        if (!ok) pass = false;
        if (!detail.empty()) detail += "; ";
        detail += (ok ? "" : "FAILED ") + what;
    }
};

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string fmt(const char* f, double a, double b) {
    char buf[192];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

std::string fmt(const char* f, double a, double b, double c) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

const MarketParams kP1{};
const SeverityModel kExp1 = SeverityModel::exponential(1.0);

Verdict ac1() {
    Verdict v;
    const auto warm = solve_diffusion(kP1, kExp1);
    const int reps = 100;
    const auto t0 = Clock::now();
    double g = 0.0;
    for (int k = 0; k < reps; ++k) g += solve_diffusion(kP1, kExp1).gamma2_tilde;
    const double per_call = seconds_since(t0) / reps;
    g /= reps;
    const double radical = (std::sqrt(0.2 * 0.2 + 2.0 * 1.1 * 2.0) - 0.2) / 2.0;
    const double bisection = oracle::quadratic_root(1.0, 0.2, 1.1);
    v.check(std::abs(g - 0.953565) <= 1e-5, fmt("gamma2_tilde=%.12f", g));
    v.check(std::abs(g - radical) <= 1e-12, fmt("radical=%.12f", radical));
    v.check(std::abs(g - bisection) <= 1e-12, fmt("bisection=%.12f", bisection));
    v.check(per_call < 1e-3, fmt("runtime %.2e s per solve", per_call));
    (void)warm;
    return v;
}

Verdict ac2() {
    Verdict v;
    const auto t0 = Clock::now();
    const auto sol = solve_diffusion(kP1, kExp1);
    const double g = sol.gamma1_tilde;
    const auto& p = kP1;
    const double integral = oracle::trapezoid_split(
        [&](double y) { return std::min((p.theta + p.eta * y) / (p.eta + g), y) * kExp1.survival(y); }, 0.0,
        kExp1.upper_support(), 1000000, {p.theta / g});
    const double res = (p.c - p.lambda * kExp1.mean()) + p.beta / g - p.lambda * g * integral;
    const double t = seconds_since(t0);
    v.check(std::abs(res) < 1e-9, fmt("gamma1_tilde=%.12f, trapezoid residual %.2e", g, res));
    v.check(t < 1.0, fmt("runtime %.3f s", t));
    return v;
}

MarketParams random_params(std::mt19937_64& rng, const SeverityModel& m) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    MarketParams p;
    p.lambda = 0.5 + 1.5 * u(rng);
    p.theta = 0.1 + 0.9 * u(rng);
    p.eta = 0.5 * u(rng);
    p.rho = 0.1 + 4.9 * u(rng);
    p.beta = 0.01 + 0.49 * u(rng);
    const double lo = p.lambda * m.mean();
    const double hi = (1.0 + p.theta) * p.lambda * m.mean() + 0.5 * p.eta * p.lambda * m.second_moment();
    p.c = lo + (0.05 + 0.9 * u(rng)) * (hi - lo);
    return p;
}

Verdict ac3() {
    Verdict v;
    const auto t0 = Clock::now();
    const auto p1 = solve_diffusion(kP1, kExp1);
    const double jump =
        std::abs(value_tilde_slope(p1, 0.0, Side::left) - value_tilde_slope(p1, 0.0, Side::right));
    v.check(jump < 1e-10, fmt("P1 pasting gap %.2e", jump));

    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> ux(-10.0, 10.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst_res = 0.0;
    double worst_jump = 0.0;
    for (int s = 0; s < 20; ++s) {
        const auto model = s % 2 == 0 ? SeverityModel::exponential(0.5 + 1.5 * u(rng))
                                      : SeverityModel::gamma(1.0 + 2.0 * u(rng), 0.5 + 1.5 * u(rng));
        const auto p = random_params(rng, model);
        const auto sol = solve_diffusion(p, model);
        worst_jump = std::max(worst_jump, std::abs(value_tilde_slope(sol, 0.0, Side::left) -
                                                   value_tilde_slope(sol, 0.0, Side::right)));
        for (int k = 0; k < 100; ++k) {
            double x = 0.0;
            while (x == 0.0) x = ux(rng);
            worst_res = std::max(worst_res, std::abs(hjb_residual_tilde(sol, x)));
        }
    }
    const double t = seconds_since(t0);
    v.check(worst_jump < 1e-10, fmt("max pasting gap over 20 sets %.2e", worst_jump));
    v.check(worst_res < 1e-8, fmt("max residual over 2000 points %.2e", worst_res));
    v.check(t < 30.0, fmt("runtime %.2f s", t));
    return v;
}

Verdict ac4() {
    Verdict v;
    const double g = gamma2(kP1, kExp1);
    const double formula = (0.9 + std::sqrt(6.09)) / 2.4;
    const double res = gamma2_residual(kP1, kExp1, g);
    v.check(std::abs(g - 1.403247) <= 1e-5, fmt("gamma2=%.12f", g));
    v.check(std::abs(g - formula) <= 1e-10, fmt("quadratic formula %.12f", formula));
    v.check(std::abs(res) < 1e-10, fmt("residual %.2e", res));
    return v;
}

Verdict ac5() {
    Verdict v;
    const double g = gamma1(kP1, kExp1);
    const double res = gamma1_residual(kP1, kExp1, g);
    v.check(std::abs(res) < 1e-8, fmt("gamma1=%.12f, residual %.2e", g, res));

    const auto t0 = Clock::now();
    auto h = [](double x) { return oracle::gamma1_residual(kP1, kExp1, x, 100000); };
    const double lo = 0.05;
    const double hi = 5.0;
    const bool bracketed = h(lo) > 0.0 && h(hi) < 0.0;
    v.check(bracketed, fmt("oracle bracket [%.2f, %.2f]", lo, hi));
    const double slow = oracle::bisect(h, lo, hi, 1e-10);
    const double rel = std::abs(slow - g) / slow;
    v.check(rel < 1e-5, fmt("slow oracle %.10f, relative gap %.2e (%.1f s)", slow, rel, seconds_since(t0)));

    const double y0 = std::log1p(kP1.theta) / g;
    const double boundary = std::abs(r_c(y0, g, kP1.theta, kP1.eta) - y0);
    v.check(boundary <= 1e-12, fmt("r_c at threshold off by %.2e", boundary));
    return v;
}

Verdict ac6() {
    Verdict v;
    const auto t0 = Clock::now();
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    double worst = 1.0;
    int n = 0;
    while (n < 10000) {
        const double a = u(rng);
        const double b = u(rng);
        const double z = u(rng);
        if (a == 0.0 || b == 0.0 || z == 0.0) continue;
        worst = std::min(worst, convexity_gap(a, b, z));
        ++n;
    }
    const double t = seconds_since(t0);
    v.check(worst >= -1e-12, fmt("min gap %.3e over 1e4 triples", worst));
    v.check(t < 1.0, fmt("runtime %.4f s", t));
    return v;
}

struct Shared {
    hjb::HjbSolution fine;
    double fine_seconds = 0.0;
};

Verdict ac7(Shared& s) {
    Verdict v;
    const hjb::GridSpec spec{-20.0, 20.0, 2001, 200};
    const auto t0 = Clock::now();
    s.fine = hjb::solve(kP1, kExp1, spec);
    s.fine_seconds = seconds_since(t0);
    const auto& sol = s.fine;
    const Bounds b{solve_adjustment(kP1, kExp1)};
    const auto& g = sol.grid();
    const std::size_t n = g.size();

    double above = -1.0;
    double below = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
        above = std::max(above, sol.values[i] - psi_bar(b, g.x(i)));
        below = std::max(below, psi_underbar(b, g.x(i)) - sol.values[i]);
    }
    v.check(above <= 1e-6 && below <= 1e-6, fmt("sandwich excess above %.2e, below %.2e", above, below));

    double rise = 0.0;
    double x_rise = 0.0;
    double rise_interior = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double d = sol.values[i + 1] - sol.values[i];
        if (d > rise) {
            rise = d;
            x_rise = g.x(i + 1);
        }
        if (i + 2 < n) rise_interior = std::max(rise_interior, d);
    }
    v.check(rise <= 1e-10, fmt("max increase %.3e at x=%.2f (%.2e excluding the x_max cell)", rise, x_rise,
                               rise_interior));
    v.check(sol.converged && sol.max_residual < 1e-4,
            fmt("converged=%g, max interior |F| %.2e, %g policy iterations", sol.converged ? 1.0 : 0.0,
                sol.max_residual, sol.iterations));
    const double ceil = kP1.rho / (kP1.rho + kP1.beta);
    const double left = std::abs(sol.values.front() - ceil);
    const double right = std::abs(sol.values.back());
    v.check(left <= 1e-3 && right <= 1e-3, fmt("boundary gaps %.2e / %.2e", left, right));
    hjb::PolicyReport rep;
    hjb::extract_policy(sol, &rep);
    v.check(rep.below_max_deviation <= 1e-4, fmt("below-zero policy max |R-y| %.2e", rep.below_max_deviation));
    v.check(s.fine_seconds < 300.0, fmt("runtime %.1f s", s.fine_seconds));
    return v;
}

Verdict ac8(const Shared& s) {
    Verdict v;
    hjb::SolverConfig cfg;
    cfg.initial = hjb::Initial::psi_underbar;
    const auto other = hjb::solve(s.fine.problem, cfg);
    double gap = 0.0;
    for (std::size_t i = 0; i < other.values.size(); ++i) gap = std::max(gap, std::abs(other.values[i] - s.fine.values[i]));
    v.check(other.converged, fmt("psi_underbar start converged in %g iterations", other.iterations));
    v.check(gap <= 10.0 * cfg.tol, fmt("max nodal gap %.2e (limit %.0e)", gap, 10.0 * cfg.tol));
    return v;
}

Verdict ac9() {
    Verdict v;
    const auto t0 = Clock::now();
    for (double x0 : {0.0, 2.0, 5.0}) {
        sim::SimConfig cfg;
        cfg.x0 = x0;
        cfg.params.beta = 1e-9;
        cfg.params.rho = 1e4;
        cfg.n_paths = 100000;
        cfg.horizon = 1000.0;  // ceil(9.3 / beta) would never end; ruin after t = 1000 is negligible here
        const auto e = sim::estimate(cfg);
        const double rate = 1.0;
        const double exact = cfg.params.lambda / (cfg.params.c * rate) *
                             std::exp(-(rate - cfg.params.lambda / cfg.params.c) * x0);
        v.check(std::abs(e.mean - exact) <= 3.0 * e.std_error + 2e-3,
                fmt("x0=%g: %.5f vs %.5f", x0, e.mean, exact) + fmt(" (SE %.1e)", e.std_error));
    }
    const double t = seconds_since(t0);
    v.check(t < 60.0, fmt("runtime %.1f s", t));
    return v;
}

Verdict ac10(const Shared& s) {
    Verdict v;
    const auto t0 = Clock::now();
    const auto coarse = hjb::solve(kP1, kExp1, {-20.0, 20.0, 1001, 200});
    const auto rule = hjb::extract_policy(s.fine);
    for (double x0 : {0.0, 1.0, 2.0}) {
        sim::SimConfig cfg;
        cfg.x0 = x0;
        cfg.n_paths = 100000;
        cfg.seed = 10;
        cfg.rule = rule;
        const auto opt = sim::estimate(cfg);
        cfg.rule = RetentionRule::full_retention();
        const auto full = sim::estimate(cfg);
        const double hjb_v = s.fine.value_at(x0);
        const double grid_gap = std::abs(hjb_v - coarse.value_at(x0));
        const double budget = 3.0 * opt.std_error + opt.bias_bound + 5.0 * grid_gap;
        const double diff = std::abs(opt.mean - hjb_v);
        v.check(diff <= budget, fmt("x0=%g: MC %.5f vs HJB %.5f", x0, opt.mean, hjb_v) +
                                    fmt(", |diff| %.4f <= budget %.4f", diff, budget));
        const double se = std::hypot(opt.std_error, full.std_error);
        v.check(opt.mean <= full.mean + 3.0 * se, fmt("x0=%g: full retention %.5f", x0, full.mean));
    }
    const double t = seconds_since(t0);
    v.check(t < 600.0, fmt("runtime %.1f s", t));
    return v;
}

Verdict ac11(const Shared& s) {
    Verdict v;
    MarketParams lo = kP1;
    lo.rho = 0.5;
    MarketParams hi = kP1;
    hi.rho = 2.0;
    const hjb::GridSpec spec{-20.0, 20.0, 2001, 200};
    const auto a = hjb::solve(lo, kExp1, spec);
    const auto& b = s.fine;
    const auto c = hjb::solve(hi, kExp1, spec);
    double worst = 0.0;
    for (std::size_t i = 0; i < b.values.size(); ++i) {
        worst = std::max({worst, a.values[i] - b.values[i], b.values[i] - c.values[i]});
    }
    v.check(worst <= 1e-6, fmt("max decrease as rho grows %.2e", worst));
    return v;
}

}  // namespace

int main() {
    Shared shared;
    struct Criterion {
        const char* id;
        const char* name;
        std::function<Verdict()> run;
    };
    const std::vector<Criterion> criteria{
        {"AC1", "diffusion gamma2 closed form", ac1},
        {"AC2", "diffusion gamma1 residual", ac2},
        {"AC3", "diffusion verification", ac3},
        {"AC4", "gamma2 oracle", ac4},
        {"AC5", "gamma1 self-consistency", ac5},
        {"AC6", "convexity inequality sweep", ac6},
        {"AC7", "HJB sandwich and monotonicity", [&] { return ac7(shared); }},
        {"AC8", "HJB uniqueness proxy", [&] { return ac8(shared); }},
        {"AC9", "MC vs classical ruin probability", ac9},
        {"AC10", "MC vs HJB cross-validation", [&] { return ac10(shared); }},
        {"AC11", "HJB rho-monotonicity", [&] { return ac11(shared); }},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = Clock::now();
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v.check(false, std::string("exception: ") + e.what());
        }
        if (!v.pass) ++failed;
        std::printf("[%s] %s %s: %s (%.2f s)\n", v.pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str(),
                    seconds_since(t0));
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed;
}
