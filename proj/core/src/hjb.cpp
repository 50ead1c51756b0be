#include "parisian/hjb.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "parisian/error.hpp"
#include "parisian/numerics.hpp"

namespace parisian::hjb {

namespace {

// Solves the 3x3 system a * s = r by Gaussian elimination with partial pivoting.
std::array<double, 3> solve3(std::array<std::array<double, 3>, 3> a, std::array<double, 3> r) {
    for (int c = 0; c < 3; ++c) {
        int piv = c;
        for (int k = c + 1; k < 3; ++k)
            if (std::abs(a[k][c]) > std::abs(a[piv][c])) piv = k;
        std::swap(a[c], a[piv]);
        std::swap(r[c], r[piv]);
        if (a[c][c] == 0.0) throw NumericalError("moment matching system is singular");
        for (int k = c + 1; k < 3; ++k) {
            const double f = a[k][c] / a[c][c];
            for (int j = c; j < 3; ++j) a[k][j] -= f * a[c][j];
            r[k] -= f * r[c];
        }
    }
    std::array<double, 3> s{};
    for (int c = 2; c >= 0; --c) {
        double acc = r[c];
        for (int j = c + 1; j < 3; ++j) acc -= a[c][j] * s[j];
        s[c] = acc / a[c][c];
    }
    return s;
}

}  // namespace

std::vector<Atom> discretize_severity(const SeverityModel& model, std::size_t n_atoms) {
    if (model.kind() == SeverityModel::Kind::discrete) {
        return {model.atoms().begin(), model.atoms().end()};
    }
    if (n_atoms < 2) throw ValidationError("n_atoms", "at least two atoms are needed to match two moments");

    const double n = static_cast<double>(n_atoms);
    std::vector<Atom> atoms(n_atoms);
    std::array<double, 5> m{};  // raw stratified moments of order 0..4
    for (std::size_t k = 0; k < n_atoms; ++k) {
        const double y = model.quantile((static_cast<double>(k) + 0.5) / n);
        atoms[k] = {y, 1.0 / n};
        double pw = 1.0 / n;
        for (auto& mj : m) {
            mj += pw;
            pw *= y;
        }
    }
    // Tilt w_k = p_k (1 + a + b y_k + c y_k^2) onto mass 1, mean and second moment.
    const auto s = solve3({{{m[0], m[1], m[2]}, {m[1], m[2], m[3]}, {m[2], m[3], m[4]}}},
                          {1.0 - m[0], model.mean() - m[1], model.second_moment() - m[2]});
    double total = 0.0;
    for (auto& a : atoms) {
        a.prob *= 1.0 + s[0] + s[1] * a.value + s[2] * a.value * a.value;
        if (!(a.prob > 0.0)) {
            std::ostringstream os;
            os << "moment matching with " << n_atoms << " atoms needs a non-positive weight at y = " << a.value;
            throw NumericalError(os.str());
        }
        total += a.prob;
    }
    for (auto& a : atoms) a.prob /= total;
    return atoms;
}

GridSpec default_grid_spec(const AdjustmentCoefficients& coefficients, std::size_t n_x, std::size_t n_atoms,
                           double decay) {
    const double depth = -std::log(decay);
    GridSpec spec;
    spec.x_min = std::min(-2.0, std::floor(-depth / coefficients.gamma2));
    spec.x_max = std::max(1.0, std::ceil(depth / coefficients.gamma1));
    // Integer bounds and h = 1/k keep x = 0 on the grid.
    const double width = spec.x_max - spec.x_min;
    const double per_unit = std::max(1.0, std::round(static_cast<double>(n_x - 1) / width));
    spec.n_x = static_cast<std::size_t>(width * per_unit) + 1;
    spec.n_atoms = n_atoms;
    return spec;
}

Grid::Grid(const GridSpec& spec, std::vector<Atom> atoms)
    : x_min_(spec.x_min), x_max_(spec.x_max), n_(spec.n_x), atoms_(std::move(atoms)) {
    std::vector<Violation> bad;
    if (!(x_min_ < -1.0)) bad.push_back({"x_min", "x_min must be below -1"});
    if (!(x_max_ > 0.0)) bad.push_back({"x_max", "x_max must be positive"});
    if (n_ < 4) bad.push_back({"n_x", "at least four nodes are needed"});
    if (!bad.empty()) throw ValidationError(std::move(bad));

    h_ = (x_max_ - x_min_) / static_cast<double>(n_ - 1);
    const double u = -x_min_ / h_;
    const double r = std::round(u);
    if (std::abs(u - r) > 1e-9 * std::max(1.0, u)) {
        throw ValidationError("grid_alignment", "x = 0 must be a grid node: -x_min / h must be an integer");
    }
    zero_ = static_cast<std::size_t>(r);
}

Problem::Problem(const MarketParams& params, const SeverityModel& model, const GridSpec& spec)
    : params_(params),
      model_(model),
      atom_model_((require_valid(params, model), SeverityModel::discrete(discretize_severity(model, spec.n_atoms)))),
      grid_(spec, {atom_model_.atoms().begin(), atom_model_.atoms().end()}),
      bounds_{solve_adjustment(params, atom_model_)},
      kappa_(parisian::kappa(params, atom_model_)) {
    const double g1 = bounds_.coefficients.gamma1;
    const double g2 = bounds_.coefficients.gamma2;
    if (std::exp(g2 * grid_.x_min()) >= 1e-6 || std::exp(-g1 * grid_.x_max()) >= 1e-6) {
        std::ostringstream os;
        os << "grid [" << grid_.x_min() << ", " << grid_.x_max() << "] is narrower than the 1e-6 decay range ["
           << std::log(1e-6) / g2 << ", " << -std::log(1e-6) / g1 << "]";
        parisian::detail::warn(os.str());
    }
}

double Problem::extension(double z, Extension kind) const {
    const double lower = psi_underbar(bounds_, z);
    if (kind == Extension::psi_underbar) return lower;
    return std::clamp(psi_bar(bounds_, z), lower, ceiling());
}

GridFunction Problem::lookup(std::span<const double> values, Extension kind) const {
    return GridFunction(grid_, values, [this, kind](double z) { return extension(z, kind); });
}

double Problem::drift(std::span<const double> retention) const {
    const auto atoms = grid_.atoms();
    double gain = 0.0;
    for (std::size_t k = 0; k < atoms.size(); ++k) gain += atoms[k].prob * retention_gain(params_, atoms[k].value, retention[k]);
    return -kappa_ + params_.lambda * gain;
}

namespace {

double upwind(double drift, std::span<const double> v, std::size_t i, double h) {
    if (drift > 0.0) return drift * (v[i + 1] - v[i]) / h;
    if (drift < 0.0) return drift * (v[i] - v[i - 1]) / h;
    return 0.0;
}

}  // namespace

double Problem::generator(std::span<const double> values, std::size_t i, std::span<const double> retention,
                          Extension ext) const {
    const auto f = lookup(values, ext);
    const auto atoms = grid_.atoms();
    const double x = grid_.x(i);
    double jumps = 0.0;
    for (std::size_t k = 0; k < atoms.size(); ++k) jumps += atoms[k].prob * f(x - retention[k]);
    return upwind(drift(retention), values, i, grid_.spacing()) + params_.lambda * (jumps - values[i]);
}

Problem::NodeOptimum Problem::optimize_node(std::span<const double> values, std::size_t i, Extension ext) const {
    const auto f = lookup(values, ext);
    const auto atoms = grid_.atoms();
    const double x = grid_.x(i);
    const double h = grid_.spacing();
    const double d_plus = (values[i + 1] - values[i]) / h;
    const double d_minus = (values[i] - values[i - 1]) / h;

    auto r_plus = hamiltonian_min(x, d_plus, f, params_, atoms).retention;
    auto r_minus = hamiltonian_min(x, d_minus, f, params_, atoms).retention;
    const double g_plus = generator(values, i, r_plus, ext);
    const double g_minus = generator(values, i, r_minus, ext);

    // Neither one-sided optimum is consistent with its own upwind direction:
    // look for the slope in between whose optimum has zero drift.
    std::vector<double> r_mid;
    if (drift(r_plus) < 0.0 && drift(r_minus) > 0.0) {
        double lo = d_minus, hi = d_plus;
        for (int it = 0; it < 40 && std::abs(hi - lo) > 1e-14 * std::max(1.0, std::abs(hi)); ++it) {
            const double mid = 0.5 * (lo + hi);
            r_mid = hamiltonian_min(x, mid, f, params_, atoms).retention;
            if (drift(r_mid) > 0.0) lo = mid;
            else hi = mid;
        }
    }

    NodeOptimum best{g_plus, std::move(r_plus)};
    if (g_minus < best.generator) best = {g_minus, std::move(r_minus)};
    if (!r_mid.empty()) {
        const double g_mid = generator(values, i, r_mid, ext);
        if (g_mid < best.generator) best = {g_mid, std::move(r_mid)};
    }
    return best;
}

double Problem::residual(std::span<const double> values, std::size_t i, Extension ext) const {
    if (i == 0 || i + 1 >= grid_.size()) throw ValidationError("node", "residual needs an interior node");
    const double below = grid_.x(i) < 0.0 ? 1.0 : 0.0;
    const double lhs = (params_.beta + params_.rho * below) * values[i] - params_.rho * below;
    return lhs - optimize_node(values, i, ext).generator;
}

namespace {

// Upwinded linear system of one fixed policy, in Gauss-Seidel form:
// v_i = (rhs_i + sum_j coef_ij v_j) / diag_i.
struct LinearSystem {
    std::vector<double> diag;
    std::vector<double> rhs;
    std::vector<std::size_t> row;
    std::vector<std::size_t> col;
    std::vector<double> coef;
};

LinearSystem assemble(const Problem& pb, std::span<const double> policy, Extension ext) {
    const auto& g = pb.grid();
    const auto& p = pb.params();
    const auto atoms = g.atoms();
    const std::size_t n = g.size();
    const std::size_t na = atoms.size();
    const double h = g.spacing();

    LinearSystem s;
    s.diag.assign(n, 1.0);
    s.rhs.assign(n, 0.0);
    s.row.assign(n + 1, 0);
    s.col.reserve(n * (2 * na + 1));
    s.coef.reserve(n * (2 * na + 1));
    for (std::size_t i = 1; i + 1 < n; ++i) {
        s.row[i] = s.col.size();
        const auto r = policy.subspan(i * na, na);
        const double x = g.x(i);
        const double below = x < 0.0 ? 1.0 : 0.0;
        const double d = pb.drift(r);
        double diag = p.beta + p.rho * below + p.lambda + std::abs(d) / h;
        double rhs = p.rho * below;
        if (d != 0.0) {
            s.col.push_back(d > 0.0 ? i + 1 : i - 1);
            s.coef.push_back(std::abs(d) / h);
        }
        for (std::size_t k = 0; k < na; ++k) {
            const double z = x - r[k];
            const double u = (z - g.x_min()) / h;
            const double wk = p.lambda * atoms[k].prob;
            if (u < 0.0) {
                rhs += wk * pb.extension(z, ext);
                continue;
            }
            std::size_t j = static_cast<std::size_t>(u);
            double w = u - static_cast<double>(j);
            if (j >= n - 1) {
                j = n - 1;
                w = 0.0;
            }
            const std::array<std::pair<std::size_t, double>, 2> parts{{{j, wk * (1.0 - w)}, {j + 1, wk * w}}};
            for (const auto& [jj, c] : parts) {
                if (c == 0.0) continue;
                if (jj == i) {
                    diag -= c;
                } else {
                    s.col.push_back(jj);
                    s.coef.push_back(c);
                }
            }
        }
        s.diag[i] = diag;
        s.rhs[i] = rhs;
    }
    s.row[n - 1] = s.col.size();
    s.row[n] = s.col.size();
    // Rows 0 and n-1 are empty: Dirichlet nodes keep their values.
    s.row[0] = 0;
    return s;
}

int gauss_seidel(const LinearSystem& s, std::vector<double>& v, const SolverConfig& cfg) {
    const std::size_t n = v.size();
    const double omega = cfg.relaxation;
    auto update = [&](std::size_t i) {
        double acc = s.rhs[i];
        for (std::size_t e = s.row[i]; e < s.row[i + 1]; ++e) acc += s.coef[e] * v[s.col[e]];
        const double next = (1.0 - omega) * v[i] + omega * acc / s.diag[i];
        const double change = std::abs(next - v[i]);
        v[i] = next;
        return change;
    };
    for (int sweep = 1; sweep <= cfg.max_sweeps; ++sweep) {
        double change = 0.0;
        if (sweep % 2 == 1) {
            for (std::size_t i = 1; i + 1 < n; ++i) change = std::max(change, update(i));
        } else {
            for (std::size_t i = n - 2; i >= 1; --i) change = std::max(change, update(i));
        }
        if (change < cfg.inner_tol) return sweep;
    }
    return cfg.max_sweeps;
}

}  // namespace

HjbSolution solve(const MarketParams& params, const SeverityModel& model, const GridSpec& spec,
                  const SolverConfig& config) {
    return solve(std::make_shared<const Problem>(params, model, spec), config);
}

HjbSolution solve(std::shared_ptr<const Problem> problem, const SolverConfig& config) {
    if (!(config.relaxation > 0.0 && config.relaxation <= 1.0)) {
        throw ValidationError("relaxation", "relaxation must lie in (0, 1]");
    }
    const Problem& pb = *problem;
    const auto& g = pb.grid();
    const auto& p = pb.params();
    const std::size_t n = g.size();
    const std::size_t na = g.atoms().size();
    const Extension ext = config.extension;

    HjbSolution sol;
    sol.problem = problem;
    sol.config = config;
    sol.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = g.x(i);
        sol.values[i] = config.initial == Initial::psi_bar ? psi_bar(pb.bounds(), x) : psi_underbar(pb.bounds(), x);
    }
    sol.values.front() = psi_bar(pb.bounds(), g.x_min());
    sol.values.back() = psi_bar(pb.bounds(), g.x_max());

    sol.policy.assign(n * na, 0.0);
    sol.residuals.assign(n, 0.0);
    auto improve = [&](bool keep_old) {
        double worst = 0.0;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            auto row = std::span<double>(sol.policy).subspan(i * na, na);
            auto opt = pb.optimize_node(sol.values, i, ext);
            const double below = g.x(i) < 0.0 ? 1.0 : 0.0;
            const double lhs = (p.beta + p.rho * below) * sol.values[i] - p.rho * below;
            sol.residuals[i] = std::abs(lhs - opt.generator);
            worst = std::max(worst, sol.residuals[i]);
            if (keep_old && !(opt.generator < pb.generator(sol.values, i, row, ext) - 1e-14)) continue;
            std::copy(opt.retention.begin(), opt.retention.end(), row.begin());
        }
        // Boundary rows report the neighbouring policy.
        std::copy_n(sol.policy.begin() + na, na, sol.policy.begin());
        std::copy_n(sol.policy.begin() + (n - 2) * na, na, sol.policy.begin() + (n - 1) * na);
        return worst;
    };

    improve(false);
    for (int it = 1; it <= config.max_policy_iterations; ++it) {
        const auto system = assemble(pb, sol.policy, ext);
        std::vector<double> next = sol.values;
        const int sweeps = gauss_seidel(system, next, config);

        IterationRecord rec{0.0, -std::numeric_limits<double>::infinity(), 0.0, sweeps};
        for (std::size_t i = 0; i < n; ++i) {
            rec.max_change = std::max(rec.max_change, std::abs(next[i] - sol.values[i]));
            rec.max_increase = std::max(rec.max_increase, next[i] - sol.values[i]);
        }
        sol.values = std::move(next);
        rec.max_residual = improve(true);
        sol.history.push_back(rec);
        sol.iterations = it;
        sol.max_residual = rec.max_residual;
        if (rec.max_change < config.tol && rec.max_residual < config.residual_tol) {
            sol.converged = true;
            break;
        }
    }

    sol.drifts.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) sol.drifts[i] = pb.drift(sol.policy_at(i));
    for (std::size_t i = 0; i + 1 < n; ++i) {
        sol.max_monotonicity_violation = std::max(sol.max_monotonicity_violation, sol.values[i + 1] - sol.values[i]);
    }
    if (!sol.converged) {
        std::ostringstream os;
        os << "policy iteration stopped after " << sol.iterations << " iterations with max residual "
           << sol.max_residual;
        parisian::detail::warn(os.str());
    }
    if (sol.max_monotonicity_violation > 1e-10) {
        std::ostringstream os;
        os << "value function increases by up to " << sol.max_monotonicity_violation << " between nodes";
        parisian::detail::warn(os.str());
    }
    return sol;
}

double HjbSolution::value_at(double x) const {
    return problem->lookup(values, config.extension)(x);
}

std::span<const double> HjbSolution::policy_at(std::size_t i) const {
    const std::size_t na = grid().atoms().size();
    return std::span<const double>(policy).subspan(i * na, na);
}

double residual(const HjbSolution& sol, std::size_t i) {
    return sol.problem->residual(sol.values, i, sol.config.extension);
}

RetentionRule extract_policy(const HjbSolution& sol, PolicyReport* report, double tol) {
    const auto& g = sol.grid();
    const auto atoms = g.atoms();
    const std::size_t n = g.size();
    const std::size_t na = atoms.size();
    const std::size_t z0 = g.zero_index();

    PolicyReport rep;
    for (std::size_t i = 0; i < z0; ++i) {
        const auto r = sol.policy_at(i);
        for (std::size_t k = 0; k < na; ++k) rep.below_max_deviation = std::max(rep.below_max_deviation, std::abs(r[k] - atoms[k].value));
    }
    std::vector<double> mean(na, 0.0);
    for (std::size_t k = 0; k < na; ++k) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (std::size_t i = z0; i < n; ++i) {
            const double r = sol.policy_at(i)[k];
            lo = std::min(lo, r);
            hi = std::max(hi, r);
            mean[k] += r;
        }
        mean[k] /= static_cast<double>(n - z0);
        rep.above_max_spread = std::max(rep.above_max_spread, hi - lo);
    }
    rep.below_full_retention = rep.below_max_deviation <= tol;
    rep.above_x_independent = rep.above_max_spread <= tol;
    if (report) *report = rep;

    std::vector<double> ys(na);
    for (std::size_t k = 0; k < na; ++k) ys[k] = atoms[k].value;

    if (rep.below_full_retention && rep.above_x_independent) {
        std::vector<double> xs{0.0};
        std::vector<double> rs{0.0};
        xs.insert(xs.end(), ys.begin(), ys.end());
        rs.insert(rs.end(), mean.begin(), mean.end());
        auto above = RetentionRule::stationary(
            [xs, rs](double y) {
                if (y <= xs.back()) return numerics::interp_linear(xs, rs, y);
                const std::size_t m = xs.size() - 1;
                const double slope = (rs[m] - rs[m - 1]) / (xs[m] - xs[m - 1]);
                return rs[m] + slope * (y - xs[m]);
            },
            ys, "hjb");
        return RetentionRule::two_regime(RetentionRule::full_retention(), above);
    }

    std::vector<double> xs(n);
    for (std::size_t i = 0; i < n; ++i) xs[i] = g.x(i);
    return RetentionRule::tabulated(std::move(xs), std::move(ys), sol.policy);
}

double policy_deviation_from_r_hat(const HjbSolution& sol) {
    const auto& g = sol.grid();
    const auto atoms = g.atoms();
    const auto& coef = sol.problem->bounds().coefficients;
    double worst = 0.0;
    for (std::size_t i = g.zero_index(); i < g.size(); ++i) {
        const auto r = sol.policy_at(i);
        for (std::size_t k = 0; k < atoms.size(); ++k) {
            const double target = r_hat(atoms[k].value, coef.gamma1, coef.params.theta, coef.params.eta);
            worst = std::max(worst, std::abs(r[k] - target));
        }
    }
    return worst;
}

}  // namespace parisian::hjb
