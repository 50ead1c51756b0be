#include "parisian/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "parisian/error.hpp"

namespace parisian::numerics {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

using Rule = boost::math::quadrature::gauss<double, 10>;

double panel(const ScalarFunction& f, double a, double b) { return Rule::integrate(f, a, b); }

double adapt(const ScalarFunction& f, double a, double b, double whole, double tol, int depth) {
    const double mid = 0.5 * (a + b);
    const double left = panel(f, a, mid);
    const double right = panel(f, mid, b);
    const double halves = left + right;
    const double diff = halves - whole;
    const double floor = 64.0 * kEps * (std::abs(left) + std::abs(right));
    if (std::abs(diff) <= std::max(tol, floor)) {
        // 20th-order rule: Richardson weight 1 / (2^20 - 1)
        return halves + diff / 1048575.0;
    }
    if (depth <= 0 || mid <= a || mid >= b) {
        throw NumericalError("integrate: no convergence on [" + std::to_string(a) + ", " +
                             std::to_string(b) + "] after maximum panel depth");
    }
    return adapt(f, a, mid, left, 0.5 * tol, depth - 1) + adapt(f, mid, b, right, 0.5 * tol, depth - 1);
}

}  // namespace

double find_root(const RootProblem& problem) {
    double lo = problem.lo;
    double hi = problem.hi;
    if (lo > hi) std::swap(lo, hi);
    const auto& f = problem.objective;
    const double f_lo = f(lo);
    if (f_lo == 0.0) return lo;
    const double f_hi = f(hi);
    if (f_hi == 0.0) return hi;
    if (std::isnan(f_lo) || std::isnan(f_hi) || std::signbit(f_lo) == std::signbit(f_hi)) {
        throw BracketError("find_root: objective has no sign change", lo, hi, f_lo, f_hi);
    }
    const double tol = problem.tolerance;
    auto done = [tol](double a, double b) {
        const double scale = std::max(std::abs(a), std::abs(b));
        return std::abs(b - a) <= std::max(2.0 * tol, 8.0 * kEps * scale);
    };
    std::uintmax_t iters = static_cast<std::uintmax_t>(std::max(problem.max_iter, 1));
    const auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, f_lo, f_hi, done, iters);
    if (!done(a, b)) {
        throw MaxIterationsError("find_root: iteration budget exhausted", a, b, f(0.5 * (a + b)));
    }
    return 0.5 * (a + b);
}

Bracket auto_bracket(const ScalarFunction& objective, double start, Direction direction,
                     int max_expansions) {
    if (!(start > 0.0)) throw NumericalError("auto_bracket: start must be positive");
    const double f0 = objective(start);
    if (f0 == 0.0) return {start, start};
    double prev = start;
    double f_prev = f0;
    for (int k = 0; k < max_expansions; ++k) {
        const double probe = direction == Direction::up ? prev * 2.0 : prev * 0.5;
        double f_probe = 0.0;
        try {
            f_probe = objective(probe);
        } catch (const DomainError& e) {
            throw DomainError(std::string("auto_bracket: objective left its domain: ") + e.what(), prev);
        }
        if (!std::isnan(f_probe) && (f_probe == 0.0 || std::signbit(f_probe) != std::signbit(f0))) {
            return direction == Direction::up ? Bracket{prev, probe} : Bracket{probe, prev};
        }
        prev = probe;
        f_prev = f_probe;
    }
    const double lo = direction == Direction::up ? start : prev;
    const double hi = direction == Direction::up ? prev : start;
    throw BracketError("auto_bracket: no sign change found", lo, hi,
                       direction == Direction::up ? f0 : f_prev,
                       direction == Direction::up ? f_prev : f0);
}

double integrate(const ScalarFunction& f, double a, double b, double tol,
                 std::span<const double> kinks, int max_depth) {
    if (a == b) return 0.0;
    if (a > b) return -integrate(f, b, a, tol, kinks, max_depth);
    std::vector<double> cuts{a};
    for (double k : kinks) {
        if (k > a && k < b) cuts.push_back(k);
    }
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    const double length = b - a;
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double lo = cuts[i];
        const double hi = cuts[i + 1];
        const double share = tol * (hi - lo) / length;
        total += adapt(f, lo, hi, panel(f, lo, hi), share, max_depth);
    }
    return total;
}

double integrate_to_infinity(const ScalarFunction& f, double a, double tol) {
    auto mapped = [&f, a](double t) {
        const double s = 1.0 - t;
        const double value = f(a + t / s);
        return value == 0.0 ? 0.0 : value / (s * s);
    };
    return integrate(mapped, 0.0, 1.0, tol);
}

double interp_linear(std::span<const double> xs, std::span<const double> ys, double x) {
    if (xs.empty()) throw NumericalError("interp_linear: empty table");
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const auto j = static_cast<std::size_t>(it - xs.begin());
    const double w = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
    return (1.0 - w) * ys[j - 1] + w * ys[j];
}

}  // namespace parisian::numerics
