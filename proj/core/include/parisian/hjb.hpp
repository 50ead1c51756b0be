#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "parisian/adjustment.hpp"
#include "parisian/claims.hpp"
#include "parisian/retention.hpp"

namespace parisian::hjb {

/// Quantile-stratified discretization: atom k sits at the median of the
/// k-th equal-probability stratum, then the weights are tilted by a quadratic
/// in y so that the first two moments match the model. Discrete models pass
/// through unchanged. Throws ValidationError for n_atoms < 2 and
/// NumericalError when the tilt would need a negative weight.
std::vector<Atom> discretize_severity(const SeverityModel& model, std::size_t n_atoms);

struct GridSpec {
    double x_min = -20.0;
    double x_max = 20.0;
    std::size_t n_x = 2001;
    std::size_t n_atoms = 200;
};

/// Domain where exp(gamma2 x_min) and exp(-gamma1 x_max) fall below `decay`,
/// widened to contain [-2, 1] and rounded outward to whole units. n_x is
/// adjusted to the nearest count with a whole number of nodes per unit.
GridSpec default_grid_spec(const AdjustmentCoefficients& coefficients, std::size_t n_x = 2001,
                           std::size_t n_atoms = 200, double decay = 1e-6);

/// Uniform spatial grid with x = 0 as a node, plus the severity atoms.
class Grid {
public:
    Grid(const GridSpec& spec, std::vector<Atom> atoms);

    double x_min() const noexcept { return x_min_; }
    double x_max() const noexcept { return x_max_; }
    double spacing() const noexcept { return h_; }
    std::size_t size() const noexcept { return n_; }
    std::size_t zero_index() const noexcept { return zero_; }
    double x(std::size_t i) const noexcept {
        return (static_cast<double>(i) - static_cast<double>(zero_)) * h_;
    }
    std::span<const Atom> atoms() const noexcept { return atoms_; }

private:
    double x_min_;
    double x_max_;
    double h_;
    std::size_t n_;
    std::size_t zero_;
    std::vector<Atom> atoms_;
};

/// Piecewise-linear interpolant of nodal values, with a fixed extension
/// below the first node.
class GridFunction {
public:
    GridFunction(const Grid& grid, std::span<const double> values, std::function<double(double)> extension)
        : grid_(&grid), values_(values), extension_(std::move(extension)) {}

    double operator()(double z) const {
        const double u = (z - grid_->x_min()) / grid_->spacing();
        if (u < 0.0) return extension_(z);
        const auto last = values_.size() - 1;
        if (u >= static_cast<double>(last)) return values_[last];
        const auto j = static_cast<std::size_t>(u);
        const double w = u - static_cast<double>(j);
        return (1.0 - w) * values_[j] + w * values_[j + 1];
    }

private:
    const Grid* grid_;
    std::span<const double> values_;
    std::function<double(double)> extension_;
};

/// Per-claim premium-weighted retention (1+theta) R + eta y R - (eta/2) R^2.
inline double retention_gain(const MarketParams& p, double y, double r) {
    return (1.0 + p.theta) * r + p.eta * y * r - 0.5 * p.eta * r * r;
}

struct HamiltonianMin {
    double value = 0.0;              ///< inf over R of sum_k p_k [gain(R_k) slope + v(x - R_k)]
    std::vector<double> retention;  ///< minimizing R per atom
};

namespace detail {

// Golden-section search for a minimum of phi on [a, b].
template <class Phi>
std::pair<double, double> golden(const Phi& phi, double a, double b, double tol) {
    constexpr double kInvPhi = 0.6180339887498949;
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = phi(c);
    double fd = phi(d);
    while (b - a > tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kInvPhi * (b - a);
            fc = phi(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kInvPhi * (b - a);
            fd = phi(d);
        }
    }
    const double r = 0.5 * (a + b);
    return {r, phi(r)};
}

// Minimizes slope * gain(R) + lookup(x - R) over R in [0, y]: 33-point scan,
// golden-section refinement around the best local minima of the scan and on
// both sides of R = x, where the surplus lands on 0 and the value function
// may kink. Ties within 1e-12 go to the larger R.
template <class Lookup>
std::pair<double, double> minimize_atom(double x, double y, double slope, const Lookup& lookup,
                                        const MarketParams& p) {
    constexpr int kScan = 33;
    constexpr int kRefine = 3;
    constexpr double kFlat = 1e-12;
    auto phi = [&](double r) { return slope * retention_gain(p, y, r) + lookup(x - r); };
    auto node = [&](int k) { return y * static_cast<double>(k) / (kScan - 1); };

    std::array<double, kScan> f;
    for (int k = 0; k < kScan; ++k) f[k] = phi(node(k));
    double best_r = y;
    double best = f[kScan - 1];
    auto consider = [&](double r, double v) {
        if (v < best - kFlat) {
            best = v;
            best_r = std::clamp(r, 0.0, y);
        }
    };
    for (int k = kScan - 2; k >= 0; --k) consider(node(k), f[k]);

    std::array<int, kScan> minima;
    int n_min = 0;
    for (int k = kScan - 1; k >= 0; --k) {
        if ((k == 0 || f[k] <= f[k - 1]) && (k == kScan - 1 || f[k] <= f[k + 1])) minima[n_min++] = k;
    }
    std::stable_sort(minima.begin(), minima.begin() + n_min, [&](int a, int b) { return f[a] < f[b]; });
    const double tol = 1e-10 * std::max(1.0, y);
    for (int m = 0; m < std::min(n_min, kRefine); ++m) {
        const int k = minima[m];
        const auto [r, v] = golden(phi, node(std::max(k - 1, 0)), node(std::min(k + 1, kScan - 1)), tol);
        consider(r, v);
    }
    if (x > 0.0 && x < y) {
        const double step = y / (kScan - 1);
        consider(x, phi(x));
        const auto [r1, v1] = golden(phi, std::max(0.0, x - step), x, tol);
        consider(r1, v1);
        const auto [r2, v2] = golden(phi, x, std::min(y, x + step), tol);
        consider(r2, v2);
    }
    return {best_r, best};
}

}  // namespace detail

/// Pointwise infimum of the nonlocal Hamiltonian at x for a given slope.
/// The infimum over retention functions decouples atom by atom.
template <class Lookup>
HamiltonianMin hamiltonian_min(double x, double slope, const Lookup& lookup, const MarketParams& params,
                               std::span<const Atom> atoms) {
    HamiltonianMin out;
    out.retention.resize(atoms.size());
    for (std::size_t k = 0; k < atoms.size(); ++k) {
        const auto [r, f] = detail::minimize_atom(x, atoms[k].value, slope, lookup, params);
        out.retention[k] = r;
        out.value += atoms[k].prob * f;
    }
    return out;
}

enum class Initial { psi_bar, psi_underbar };
enum class Extension { psi_bar, psi_underbar };

struct SolverConfig {
    double tol = 1e-9;              ///< max |v_new - v_old| between policy iterations
    double residual_tol = 1e-4;     ///< max interior |F|
    int max_policy_iterations = 200;
    int max_sweeps = 100000;        ///< Gauss-Seidel sweeps per linear solve
    double inner_tol = 1e-13;       ///< Gauss-Seidel stopping threshold
    double relaxation = 1.0;        ///< damping of the value update in (0, 1]
    Initial initial = Initial::psi_bar;
    Extension extension = Extension::psi_bar;
};

/// The discretized HJB operator: grid, parameters, atom severity and the
/// analytic bounds used for values below the grid.
class Problem {
public:
    Problem(const MarketParams& params, const SeverityModel& model, const GridSpec& spec);

    const Grid& grid() const noexcept { return grid_; }
    const MarketParams& params() const noexcept { return params_; }
    const SeverityModel& model() const noexcept { return model_; }
    const SeverityModel& atom_model() const noexcept { return atom_model_; }
    double kappa() const noexcept { return kappa_; }
    /// Bounds computed for the atom severity actually used by the scheme.
    const Bounds& bounds() const noexcept { return bounds_; }
    double ceiling() const noexcept { return bounds_.ceiling(); }

    double extension(double z, Extension kind) const;
    GridFunction lookup(std::span<const double> values, Extension kind) const;

    /// Drift c - premium of the per-atom policy at one node.
    double drift(std::span<const double> retention) const;

    /// Discrete generator L^R v at node i: upwinded drift term plus jumps.
    double generator(std::span<const double> values, std::size_t i, std::span<const double> retention,
                     Extension ext) const;

    struct NodeOptimum {
        double generator;
        std::vector<double> retention;
    };
    /// Minimizes the upwinded generator over policies at node i.
    NodeOptimum optimize_node(std::span<const double> values, std::size_t i, Extension ext) const;

    /// Signed F at interior node i for an arbitrary value vector, with a fresh
    /// policy minimization.
    double residual(std::span<const double> values, std::size_t i, Extension ext = Extension::psi_bar) const;

private:
    MarketParams params_;
    SeverityModel model_;
    SeverityModel atom_model_;
    Grid grid_;
    Bounds bounds_;
    double kappa_;
};

struct IterationRecord {
    double max_change;    ///< max |v_new - v_old|
    double max_increase;  ///< max (v_new - v_old), <= 0 for a monotone improvement
    double max_residual;
    int sweeps;
};

struct HjbSolution {
    std::shared_ptr<const Problem> problem;
    std::vector<double> values;
    std::vector<double> policy;     ///< row-major: node by atom
    std::vector<double> residuals;  ///< |F| per node, zero at the Dirichlet nodes
    std::vector<double> drifts;
    std::vector<IterationRecord> history;
    int iterations = 0;
    bool converged = false;
    double max_residual = 0.0;
    double max_monotonicity_violation = 0.0;  ///< max (v[i+1] - v[i]), 0 if monotone
    SolverConfig config;

    const Grid& grid() const { return problem->grid(); }
    double value_at(double x) const;
    std::span<const double> policy_at(std::size_t i) const;
};

/// Policy iteration: a Gauss-Seidel solve of the upwinded linear equation for
/// the current policy, then a pointwise policy improvement, until the value
/// change and the residual both meet the tolerances. Dirichlet data
/// v(x_min) = psi_bar(x_min), v(x_max) = psi_bar(x_max). Non-convergence is
/// reported through `converged`, never thrown.
HjbSolution solve(const MarketParams& params, const SeverityModel& model, const GridSpec& spec,
                  const SolverConfig& config = {});
HjbSolution solve(std::shared_ptr<const Problem> problem, const SolverConfig& config = {});

/// Signed F at an interior node of a solution.
double residual(const HjbSolution& sol, std::size_t i);

struct PolicyReport {
    bool below_full_retention = false;
    bool above_x_independent = false;
    double below_max_deviation = 0.0;  ///< max |R - y| over x < 0 nodes and atoms
    double above_max_spread = 0.0;     ///< max over atoms of the range of R across x >= 0 nodes
};

/// Policy as a retention rule: two-regime when the table is full retention
/// below zero and x-independent above (within `tol`), tabulated otherwise.
RetentionRule extract_policy(const HjbSolution& sol, PolicyReport* report = nullptr, double tol = 1e-4);

/// Max |R_hjb(x, y_k) - r_hat(y_k; gamma1)| over x >= 0 nodes and atoms.
double policy_deviation_from_r_hat(const HjbSolution& sol);

}  // namespace parisian::hjb
