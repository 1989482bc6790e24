#include "varsens/errors.hpp"

#include <sstream>
#include <utility>

namespace varsens {

Error::Error(ErrorCategory category, std::string kind, const std::string& message)
    : std::runtime_error(message), category_(category), kind_(std::move(kind)) {}

InvalidArgument::InvalidArgument(const std::string& message)
    : Error(ErrorCategory::input, "InvalidArgument", message) {}

SyntaxError::SyntaxError(std::size_t position, const std::string& message)
    : Error(ErrorCategory::input, "SyntaxError",
            "at position " + std::to_string(position) + ": " + message),
      position_(position) {}

UnknownFunction::UnknownFunction(std::size_t position, const std::string& name)
    : Error(ErrorCategory::input, "UnknownFunction",
            "at position " + std::to_string(position) + ": unknown function '" + name + "'"),
      name_(name),
      position_(position) {}

ArityMismatch::ArityMismatch(std::size_t position, const std::string& name,
                             std::size_t expected, std::size_t got)
    : Error(ErrorCategory::input, "ArityMismatch",
            "at position " + std::to_string(position) + ": '" + name + "' takes " +
                std::to_string(expected) + " argument(s), got " + std::to_string(got)),
      position_(position) {}

UnboundVariable::UnboundVariable(const std::string& name)
    : Error(ErrorCategory::input, "UnboundVariable", "variable '" + name + "' is not bound"),
      name_(name) {}

NonFiniteResult::NonFiniteResult(const std::string& message)
    : Error(ErrorCategory::numerical, "NonFiniteResult", message) {}

NonFiniteIntegrand::NonFiniteIntegrand(const std::string& where)
    : Error(ErrorCategory::numerical, "NonFiniteIntegrand",
            "integrand is not finite at " + where) {}

namespace {
std::string budget_message(double required, std::uint64_t allowed) {
    std::ostringstream os;
    os << "grid needs " << required << " evaluations, budget allows " << allowed;
    return os.str();
}
}  // namespace

BudgetExceeded::BudgetExceeded(double required, std::uint64_t allowed)
    : Error(ErrorCategory::budget, "BudgetExceeded", budget_message(required, allowed)),
      required_(required),
      allowed_(allowed) {}

NegativeVariance::NegativeVariance(double value)
    : Error(ErrorCategory::numerical, "NegativeVariance",
            [&] {
                std::ostringstream os;
                os.precision(17);
                os << "variance estimate " << value << " is negative beyond rounding noise";
                return os.str();
            }()),
      value_(value) {}

NoVariation::NoVariation(const std::string& message)
    : Error(ErrorCategory::numerical, "NoVariation", message) {}

UncoveredVariable::UncoveredVariable(const std::string& name)
    : Error(ErrorCategory::input, "UncoveredVariable",
            "variable '" + name + "' has no parameter specification"),
      name_(name) {}

DuplicateParam::DuplicateParam(const std::string& name)
    : Error(ErrorCategory::input, "DuplicateParam", "parameter '" + name + "' given twice") {}

MalformedLegacyEntry::MalformedLegacyEntry(std::size_t index, const std::string& message)
    : Error(ErrorCategory::input, "MalformedLegacyEntry",
            "legacy parameter entry " + std::to_string(index) + ": " + message),
      index_(index) {}

int exit_code(ErrorCategory category) noexcept {
    switch (category) {
        case ErrorCategory::input: return 2;
        case ErrorCategory::numerical: return 3;
        case ErrorCategory::budget: return 4;
    }
    return 1;
}

}  // namespace varsens
