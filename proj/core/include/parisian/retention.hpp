#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "parisian/claims.hpp"

namespace parisian {

/// Feedback retention function R(x, y): the part of a claim y kept by the
/// insurer when the pre-claim surplus is x. Every query is clipped to
/// [0, y], so the rule is admissible by construction.
class RetentionRule {
public:
    enum class Kind { full_retention, stationary, two_regime, tabulated };

    /// R(x, y) = y.
    static RetentionRule full_retention();
    /// R(x, y) = retention(y). `kinks` lists derivative jumps in y, used by
    /// premium quadrature.
    static RetentionRule stationary(ClaimRetention retention, std::vector<double> kinks = {},
                                    std::string label = "stationary");
    /// `below_zero` for x < 0, `at_or_above` for x >= 0. Both parts must be
    /// x-independent (full_retention or stationary).
    static RetentionRule two_regime(const RetentionRule& below_zero, const RetentionRule& at_or_above);
    /// Retentions at nodes (x_grid[i], y_grid[j]), row-major by x. Off-grid
    /// queries interpolate bilinearly; in y the table is anchored at R(x, 0) = 0
    /// and extrapolated past the last column with the last segment's slope.
    static RetentionRule tabulated(std::vector<double> x_grid, std::vector<double> y_grid,
                                   std::vector<double> values);

    Kind kind() const noexcept { return kind_; }
    const std::string& label() const noexcept { return label_; }

    double retained(double x, double y) const;

    /// True for rules that depend on x only through the sign of x.
    bool sign_dependent_only() const noexcept { return kind_ != Kind::tabulated; }

    /// Slice y -> R(x, y) for x-independent parts; `below_zero` selects the
    /// regime of a two-regime rule. Throws for tabulated rules.
    ClaimRetention regime(bool below_zero) const;
    std::vector<double> regime_kinks(bool below_zero) const;

    // Tabulated access.
    std::span<const double> x_grid() const noexcept { return x_grid_; }
    std::span<const double> y_grid() const noexcept { return y_grid_; }
    std::span<const double> table() const noexcept { return table_; }
    /// R(x_grid[i], y) with interpolation in y only.
    double retained_at_node(std::size_t i, double y) const;

private:
    RetentionRule() = default;
    double interpolate_row(std::size_t i, double y) const;

    Kind kind_ = Kind::full_retention;
    std::string label_ = "full_retention";
    ClaimRetention fn_;
    std::vector<double> kinks_;
    std::shared_ptr<const RetentionRule> below_;
    std::shared_ptr<const RetentionRule> above_;
    std::vector<double> x_grid_;
    std::vector<double> y_grid_;
    std::vector<double> table_;
};

}  // namespace parisian
