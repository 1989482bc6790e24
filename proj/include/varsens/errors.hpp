#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace varsens {

/// Coarse classification used to map failures onto process exit codes.
enum class ErrorCategory { input, numerical, budget };

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, std::string kind, const std::string& message);

    ErrorCategory category() const noexcept { return category_; }
    /// Stable machine name, e.g. "SyntaxError" or "BudgetExceeded".
    const std::string& kind() const noexcept { return kind_; }

private:
    ErrorCategory category_;
    std::string kind_;
};

class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& message);
};

// ---- expression errors -----------------------------------------------------

class SyntaxError : public Error {
public:
    SyntaxError(std::size_t position, const std::string& message);
    /// Zero-based byte offset into the source text.
    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

class UnknownFunction : public Error {
public:
    UnknownFunction(std::size_t position, const std::string& name);
    const std::string& name() const noexcept { return name_; }
    std::size_t position() const noexcept { return position_; }

private:
    std::string name_;
    std::size_t position_;
};

class ArityMismatch : public Error {
public:
    ArityMismatch(std::size_t position, const std::string& name, std::size_t expected,
                  std::size_t got);
    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

class UnboundVariable : public Error {
public:
    explicit UnboundVariable(const std::string& name);
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

class NonFiniteResult : public Error {
public:
    explicit NonFiniteResult(const std::string& message);
};

// ---- numerical errors ------------------------------------------------------

class NonFiniteIntegrand : public Error {
public:
    explicit NonFiniteIntegrand(const std::string& where);
};

class BudgetExceeded : public Error {
public:
    BudgetExceeded(double required, std::uint64_t allowed);
    double required() const noexcept { return required_; }
    std::uint64_t allowed() const noexcept { return allowed_; }

private:
    double required_;
    std::uint64_t allowed_;
};

class NegativeVariance : public Error {
public:
    explicit NegativeVariance(double value);
    double value() const noexcept { return value_; }

private:
    double value_;
};

class NoVariation : public Error {
public:
    explicit NoVariation(const std::string& message);
};

// ---- model / request errors ------------------------------------------------

class UncoveredVariable : public Error {
public:
    explicit UncoveredVariable(const std::string& name);
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

class DuplicateParam : public Error {
public:
    explicit DuplicateParam(const std::string& name);
};

class MalformedLegacyEntry : public Error {
public:
    MalformedLegacyEntry(std::size_t index, const std::string& message);
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

/// Process exit code for an error category: 2 input, 3 numerical, 4 budget.
int exit_code(ErrorCategory category) noexcept;

}  // namespace varsens
