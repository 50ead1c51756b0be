#pragma once

#include <functional>
#include <span>

namespace parisian::numerics {

using ScalarFunction = std::function<double(double)>;

/// A bracketed scalar root problem. The objective must change sign on
/// [lo, hi] (a zero at either endpoint counts).
struct RootProblem {
    ScalarFunction objective;
    double lo = 0.0;
    double hi = 1.0;
    double tolerance = 1e-12;  ///< absolute, on the root location
    int max_iter = 200;
};

/// Bracketing root finder (TOMS 748: inverse-cubic/secant steps with a
/// bisection safeguard). On exit the final bracket width is at most
/// 2 * tolerance (or a few ulps when tolerance is below machine precision)
/// and the midpoint is returned.
///
/// Throws BracketError when there is no sign change and MaxIterationsError
/// when max_iter is exhausted.
double find_root(const RootProblem& problem);

struct Bracket {
    double lo;
    double hi;
};

enum class Direction { up, down };

/// Geometric bracket search for positive-valued unknowns whose scale is not
/// known in advance. Starting from `start > 0`, the probe is multiplied
/// (Direction::up) or divided (Direction::down) by 2 until the objective
/// changes sign relative to its value at `start`.
///
/// A DomainError raised by the objective is rethrown with the last good
/// probe as its boundary; running out of expansions raises BracketError.
Bracket auto_bracket(const ScalarFunction& objective, double start, Direction direction,
                     int max_expansions = 200);

/// Adaptive Gauss-Legendre quadrature (10-point panels, halving until the
/// whole/halves estimates agree). `kinks` are points where f has a derivative
/// jump; they become panel endpoints. Throws NumericalError when a panel does
/// not settle within `max_depth` halvings.
double integrate(const ScalarFunction& f, double a, double b, double tol,
                 std::span<const double> kinks = {}, int max_depth = 48);

/// Integral over [a, inf) through the substitution y = a + t / (1 - t).
double integrate_to_infinity(const ScalarFunction& f, double a, double tol);

/// Piecewise-linear interpolation on sorted abscissae, constant beyond the
/// ends. Preserves monotonicity of the data.
double interp_linear(std::span<const double> xs, std::span<const double> ys, double x);

}  // namespace parisian::numerics
