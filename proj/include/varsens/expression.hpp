#pragma once

// Expression trees for real-valued multivariate functions.
//
// Grammar (lowest to highest precedence):
//   sum     := product (('+' | '-') product)*
//   product := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' unary)?          right-associative
//   primary := number | constant | variable | call | '(' sum ')'
//
// so "-x^2" is -(x^2) and "2^-1" is 0.5. `Math.fn`, `Math.PI` and `Math.E`
// are accepted as spellings of `fn`, `pi` and `e`.

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace varsens {

enum class UnaryOp : std::uint8_t { neg };
enum class BinaryOp : std::uint8_t { add, sub, mul, div, pow };

enum class Function : std::uint8_t {
    sin, cos, tan, asin, acos, atan, sinh, cosh, tanh,
    exp, ln, log, log10, sqrt, abs,
    pow, min, max,
};

std::string_view function_name(Function fn) noexcept;
std::size_t function_arity(Function fn) noexcept;
std::optional<Function> lookup_function(std::string_view name) noexcept;
/// True for names that cannot be used as variables (`pi`, `e`, function names).
bool is_reserved_name(std::string_view name) noexcept;

class Expression;

struct NumberLiteral {
    double value;
};
struct Variable {
    std::string name;
};
struct Unary {
    UnaryOp op;
    std::shared_ptr<const Expression> child;
};
struct Binary {
    BinaryOp op;
    std::shared_ptr<const Expression> left;
    std::shared_ptr<const Expression> right;
};
struct Call {
    Function function;
    std::vector<std::shared_ptr<const Expression>> args;
};

/// Immutable expression node. Subtrees are shared, so copies are cheap.
class Expression {
public:
    using Node = std::variant<NumberLiteral, Variable, Unary, Binary, Call>;

    static Expression number(double value);
    static Expression variable(std::string name);
    static Expression unary(UnaryOp op, Expression child);
    static Expression binary(BinaryOp op, Expression left, Expression right);
    static Expression call(Function fn, std::vector<Expression> args);

    const Node& node() const noexcept { return *node_; }

    friend bool operator==(const Expression& a, const Expression& b);

private:
    explicit Expression(Node node);
    std::shared_ptr<const Node> node_;
};

using Binding = std::map<std::string, double, std::less<>>;

Expression parse(std::string_view source);

/// Interprets the tree. Throws UnboundVariable or NonFiniteResult.
double evaluate(const Expression& expr, const Binding& at);

/// Free variables in first-occurrence order.
std::vector<std::string> free_variables(const Expression& expr);

/// Fully parenthesized serialization; parse(to_string(e)) evaluates like e.
std::string to_string(const Expression& expr);

/// Flat postfix program for fast repeated evaluation.
///
/// Variables are resolved once to positions in a caller-chosen ordering, so
/// evaluation takes a span of values and does no lookups. Evaluation does not
/// throw; non-finite values are returned as-is for the caller to reject.
class CompiledExpression {
public:
    /// Every free variable of `expr` must appear in `variables`; entries in
    /// `variables` that the expression does not use are permitted.
    CompiledExpression(const Expression& expr, std::span<const std::string> variables);

    double operator()(std::span<const double> values) const noexcept;

    std::size_t arity() const noexcept { return arity_; }

private:
    enum class Op : std::uint8_t {
        constant, load,
        neg, add, sub, mul, div, pow,
        sin, cos, tan, asin, acos, atan, sinh, cosh, tanh,
        exp, ln, log10, sqrt, abs,
        pow2, min2, max2,
    };
    struct Instruction {
        Op op;
        std::uint32_t slot = 0;
        double constant = 0.0;
    };

    void emit(const Expression& expr, std::span<const std::string> variables, std::size_t depth);

    std::vector<Instruction> code_;
    std::size_t max_depth_ = 0;
    std::size_t arity_ = 0;
};

}  // namespace varsens
