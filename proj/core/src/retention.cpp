#include "parisian/retention.hpp"

#include <algorithm>
#include <cmath>

#include "parisian/numerics.hpp"

namespace parisian {

RetentionRule RetentionRule::full_retention() { return RetentionRule{}; }

RetentionRule RetentionRule::stationary(ClaimRetention retention, std::vector<double> kinks, std::string label) {
    if (!retention) throw ValidationError("retention_rule", "stationary rule needs a retention function");
    RetentionRule r;
    r.kind_ = Kind::stationary;
    r.fn_ = std::move(retention);
    r.kinks_ = std::move(kinks);
    r.label_ = std::move(label);
    return r;
}

RetentionRule RetentionRule::two_regime(const RetentionRule& below_zero, const RetentionRule& at_or_above) {
    for (const auto* part : {&below_zero, &at_or_above}) {
        if (part->kind_ == Kind::tabulated || part->kind_ == Kind::two_regime) {
            throw ValidationError("retention_rule", "two-regime parts must be x-independent rules");
        }
    }
    RetentionRule r;
    r.kind_ = Kind::two_regime;
    r.below_ = std::make_shared<const RetentionRule>(below_zero);
    r.above_ = std::make_shared<const RetentionRule>(at_or_above);
    r.label_ = "two_regime(" + below_zero.label_ + " | " + at_or_above.label_ + ")";
    return r;
}

RetentionRule RetentionRule::tabulated(std::vector<double> x_grid, std::vector<double> y_grid,
                                       std::vector<double> values) {
    if (x_grid.empty() || y_grid.empty() || values.size() != x_grid.size() * y_grid.size()) {
        throw ValidationError("retention_table", "tabulated rule needs |values| = |x_grid| * |y_grid|");
    }
    if (!std::is_sorted(x_grid.begin(), x_grid.end()) || !std::is_sorted(y_grid.begin(), y_grid.end()) ||
        y_grid.front() <= 0.0) {
        throw ValidationError("retention_table", "grids must be sorted and y_grid strictly positive");
    }
    RetentionRule r;
    r.kind_ = Kind::tabulated;
    r.label_ = "tabulated";
    r.x_grid_ = std::move(x_grid);
    r.y_grid_ = std::move(y_grid);
    r.table_ = std::move(values);
    return r;
}

double RetentionRule::interpolate_row(std::size_t i, double y) const {
    const std::size_t ny = y_grid_.size();
    const double* row = table_.data() + i * ny;
    if (y <= y_grid_.front()) return row[0] * (y / y_grid_.front());
    if (y >= y_grid_.back()) {
        if (ny == 1) return row[0] * (y / y_grid_.front());
        const double slope = (row[ny - 1] - row[ny - 2]) / (y_grid_[ny - 1] - y_grid_[ny - 2]);
        return row[ny - 1] + slope * (y - y_grid_[ny - 1]);
    }
    return numerics::interp_linear(y_grid_, std::span<const double>(row, ny), y);
}

double RetentionRule::retained_at_node(std::size_t i, double y) const {
    if (kind_ != Kind::tabulated) throw ValidationError("retention_rule", "retained_at_node needs a tabulated rule");
    return std::clamp(interpolate_row(std::min(i, x_grid_.size() - 1), y), 0.0, y);
}

double RetentionRule::retained(double x, double y) const {
    if (y <= 0.0) return 0.0;
    double r = y;
    switch (kind_) {
        case Kind::full_retention:
            return y;
        case Kind::stationary:
            r = fn_(y);
            break;
        case Kind::two_regime:
            r = (x < 0.0 ? below_ : above_)->retained(x, y);
            break;
        case Kind::tabulated: {
            const auto& xs = x_grid_;
            if (x <= xs.front()) {
                r = interpolate_row(0, y);
            } else if (x >= xs.back()) {
                r = interpolate_row(xs.size() - 1, y);
            } else {
                const auto j = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin());
                const double w = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
                r = (1.0 - w) * interpolate_row(j - 1, y) + w * interpolate_row(j, y);
            }
            break;
        }
    }
    return std::clamp(r, 0.0, y);
}

ClaimRetention RetentionRule::regime(bool below_zero) const {
    switch (kind_) {
        case Kind::full_retention:
            return [](double y) { return y; };
        case Kind::stationary:
            return [fn = fn_](double y) { return y <= 0.0 ? 0.0 : std::clamp(fn(y), 0.0, y); };
        case Kind::two_regime:
            return (below_zero ? below_ : above_)->regime(below_zero);
        case Kind::tabulated:
            break;
    }
    throw ValidationError("retention_rule", "tabulated rules have no sign regimes");
}

std::vector<double> RetentionRule::regime_kinks(bool below_zero) const {
    switch (kind_) {
        case Kind::stationary:
            return kinks_;
        case Kind::two_regime:
            return (below_zero ? below_ : above_)->regime_kinks(below_zero);
        default:
            return {};
    }
}

}  // namespace parisian
