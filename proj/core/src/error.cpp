#include "parisian/error.hpp"

#include <sstream>

namespace parisian {

namespace {

std::string join_messages(const std::vector<Violation>& violations) {
    std::ostringstream out;
    out << "invalid parameters:";
    for (const auto& v : violations) out << " [" << v.code << "] " << v.message << ";";
    return out.str();
}

std::string with_bracket(const std::string& what, double lo, double hi, double a, double b,
                         const char* a_name, const char* b_name) {
    std::ostringstream out;
    out.precision(17);
    out << what << " (bracket [" << lo << ", " << hi << "], " << a_name << "=" << a << ", "
        << b_name << "=" << b << ")";
    return out.str();
}

}  // namespace

ValidationError::ValidationError(std::vector<Violation> violations)
    : Error(join_messages(violations)), violations_(std::move(violations)) {}

ValidationError::ValidationError(std::string code, const std::string& message)
    : ValidationError(std::vector<Violation>{{std::move(code), message}}) {}

BracketError::BracketError(const std::string& what, double lo_, double hi_, double f_lo_, double f_hi_)
    : NumericalError(with_bracket(what, lo_, hi_, f_lo_, f_hi_, "f(lo)", "f(hi)")),
      lo(lo_), hi(hi_), f_lo(f_lo_), f_hi(f_hi_) {}

MaxIterationsError::MaxIterationsError(const std::string& what, double lo_, double hi_,
                                       double last_residual_)
    : NumericalError(with_bracket(what, lo_, hi_, last_residual_, hi_ - lo_, "residual", "width")),
      lo(lo_), hi(hi_), last_residual(last_residual_) {}

DomainError::DomainError(const std::string& what, double boundary_)
    : NumericalError(what + " (domain boundary " + std::to_string(boundary_) + ")"),
      boundary(boundary_) {}

}  // namespace parisian
