#include "varsens/expression.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <utility>

#include "varsens/errors.hpp"

namespace varsens {

namespace {

struct FunctionInfo {
    Function fn;
    std::string_view name;
    std::size_t arity;
};

constexpr std::array<FunctionInfo, 18> kFunctions{{
    {Function::sin, "sin", 1},     {Function::cos, "cos", 1},     {Function::tan, "tan", 1},
    {Function::asin, "asin", 1},   {Function::acos, "acos", 1},   {Function::atan, "atan", 1},
    {Function::sinh, "sinh", 1},   {Function::cosh, "cosh", 1},   {Function::tanh, "tanh", 1},
    {Function::exp, "exp", 1},     {Function::ln, "ln", 1},       {Function::log, "log", 1},
    {Function::log10, "log10", 1}, {Function::sqrt, "sqrt", 1},   {Function::abs, "abs", 1},
    {Function::pow, "pow", 2},     {Function::min, "min", 2},     {Function::max, "max", 2},
}};

const FunctionInfo& info(Function fn) noexcept {
    return kFunctions[static_cast<std::size_t>(fn)];
}

bool is_ident_start(char c) noexcept {
    return std::isalpha(static_cast<unsigned char>(c)) != 0 || c == '_';
}
bool is_ident_char(char c) noexcept {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}
bool is_digit(char c) noexcept { return c >= '0' && c <= '9'; }

// ---- lexer ------------------------------------------------------------------

enum class Tok { number, ident, plus, minus, star, slash, caret, lparen, rparen, comma, end };

struct Token {
    Tok kind;
    std::size_t pos;
    std::string text;
    double value = 0.0;
};

std::string describe(const Token& t) {
    switch (t.kind) {
        case Tok::end: return "end of input";
        case Tok::number:
        case Tok::ident: return "'" + t.text + "'";
        default: return "'" + t.text + "'";
    }
}

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_space();
            if (i_ >= src_.size()) {
                out.push_back({Tok::end, i_, ""});
                return out;
            }
            const char c = src_[i_];
            if (is_digit(c) || (c == '.' && i_ + 1 < src_.size() && is_digit(src_[i_ + 1]))) {
                out.push_back(number());
            } else if (is_ident_start(c)) {
                out.push_back(identifier());
            } else {
                out.push_back(punct());
            }
        }
    }

private:
    void skip_space() {
        while (i_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[i_])) != 0) ++i_;
    }

    Token number() {
        const std::size_t start = i_;
        while (i_ < src_.size() && is_digit(src_[i_])) ++i_;
        if (i_ < src_.size() && src_[i_] == '.') {
            ++i_;
            while (i_ < src_.size() && is_digit(src_[i_])) ++i_;
        }
        if (i_ < src_.size() && (src_[i_] == 'e' || src_[i_] == 'E')) {
            std::size_t j = i_ + 1;
            if (j < src_.size() && (src_[j] == '+' || src_[j] == '-')) ++j;
            if (j < src_.size() && is_digit(src_[j])) {
                i_ = j;
                while (i_ < src_.size() && is_digit(src_[i_])) ++i_;
            }
        }
        Token t{Tok::number, start, std::string(src_.substr(start, i_ - start))};
        const char* first = src_.data() + start;
        const char* last = src_.data() + i_;
        auto [ptr, ec] = std::from_chars(first, last, t.value);
        if (ec != std::errc() || ptr != last || !std::isfinite(t.value)) {
            throw SyntaxError(start, "invalid numeric literal '" + t.text + "'");
        }
        return t;
    }

    std::string_view raw_identifier() {
        const std::size_t start = i_;
        while (i_ < src_.size() && is_ident_char(src_[i_])) ++i_;
        return src_.substr(start, i_ - start);
    }

    Token identifier() {
        const std::size_t start = i_;
        std::string_view name = raw_identifier();
        if (name == "Math") {
            std::size_t j = i_;
            while (j < src_.size() && std::isspace(static_cast<unsigned char>(src_[j])) != 0) ++j;
            if (j >= src_.size() || src_[j] != '.') {
                throw SyntaxError(start, "expected '.' after 'Math'");
            }
            ++j;
            while (j < src_.size() && std::isspace(static_cast<unsigned char>(src_[j])) != 0) ++j;
            if (j >= src_.size() || !is_ident_start(src_[j])) {
                throw SyntaxError(j, "expected a member name after 'Math.'");
            }
            i_ = j;
            const std::string_view member = raw_identifier();
            if (member == "PI") return {Tok::ident, start, "pi"};
            if (member == "E") return {Tok::ident, start, "e"};
            return {Tok::ident, start, std::string(member)};
        }
        return {Tok::ident, start, std::string(name)};
    }

    Token punct() {
        const std::size_t start = i_++;
        const char c = src_[start];
        switch (c) {
            case '+': return {Tok::plus, start, "+"};
            case '-': return {Tok::minus, start, "-"};
            case '*': return {Tok::star, start, "*"};
            case '/': return {Tok::slash, start, "/"};
            case '^': return {Tok::caret, start, "^"};
            case '(': return {Tok::lparen, start, "("};
            case ')': return {Tok::rparen, start, ")"};
            case ',': return {Tok::comma, start, ","};
            default: break;
        }
        throw SyntaxError(start, std::string("unexpected character '") + c + "'");
    }

    std::string_view src_;
    std::size_t i_ = 0;
};

// ---- parser -----------------------------------------------------------------

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

    Expression run() {
        Expression e = sum();
        if (peek().kind != Tok::end) {
            throw SyntaxError(peek().pos, "unexpected " + describe(peek()) +
                                              " (implicit multiplication is not supported)");
        }
        return e;
    }

private:
    const Token& peek() const { return toks_[k_]; }
    const Token& take() { return toks_[k_++]; }
    bool accept(Tok kind) {
        if (peek().kind != kind) return false;
        ++k_;
        return true;
    }
    void expect(Tok kind, const char* what) {
        if (!accept(kind)) {
            throw SyntaxError(peek().pos, std::string("expected ") + what + ", found " +
                                              describe(peek()));
        }
    }

    Expression sum() {
        Expression lhs = product();
        for (;;) {
            if (accept(Tok::plus)) {
                lhs = Expression::binary(BinaryOp::add, std::move(lhs), product());
            } else if (accept(Tok::minus)) {
                lhs = Expression::binary(BinaryOp::sub, std::move(lhs), product());
            } else {
                return lhs;
            }
        }
    }

    Expression product() {
        Expression lhs = unary();
        for (;;) {
            if (accept(Tok::star)) {
                lhs = Expression::binary(BinaryOp::mul, std::move(lhs), unary());
            } else if (accept(Tok::slash)) {
                lhs = Expression::binary(BinaryOp::div, std::move(lhs), unary());
            } else {
                return lhs;
            }
        }
    }

    Expression unary() {
        if (accept(Tok::minus)) return Expression::unary(UnaryOp::neg, unary());
        if (accept(Tok::plus)) return unary();
        return power();
    }

    Expression power() {
        Expression base = primary();
        if (accept(Tok::caret)) {
            return Expression::binary(BinaryOp::pow, std::move(base), unary());
        }
        return base;
    }

    Expression primary() {
        const Token& t = take();
        switch (t.kind) {
            case Tok::number: return Expression::number(t.value);
            case Tok::lparen: {
                Expression inner = sum();
                expect(Tok::rparen, "')'");
                return inner;
            }
            case Tok::ident: return identifier(t);
            default: break;
        }
        throw SyntaxError(t.pos, "expected an operand, found " + describe(t));
    }

    Expression identifier(const Token& t) {
        if (peek().kind == Tok::lparen) {
            const auto fn = lookup_function(t.text);
            if (!fn) throw UnknownFunction(t.pos, t.text);
            ++k_;
            std::vector<Expression> args;
            if (peek().kind != Tok::rparen) {
                args.push_back(sum());
                while (accept(Tok::comma)) args.push_back(sum());
            }
            expect(Tok::rparen, "')'");
            const std::size_t arity = function_arity(*fn);
            if (args.size() != arity) throw ArityMismatch(t.pos, t.text, arity, args.size());
            return Expression::call(*fn, std::move(args));
        }
        if (t.text == "pi") return Expression::number(std::numbers::pi);
        if (t.text == "e") return Expression::number(std::numbers::e);
        if (lookup_function(t.text)) {
            throw SyntaxError(t.pos, "function '" + t.text + "' must be called with arguments");
        }
        return Expression::variable(t.text);
    }

    std::vector<Token> toks_;
    std::size_t k_ = 0;
};

// ---- interpretation ---------------------------------------------------------

double apply(Function fn, double a, double b) noexcept {
    switch (fn) {
        case Function::sin: return std::sin(a);
        case Function::cos: return std::cos(a);
        case Function::tan: return std::tan(a);
        case Function::asin: return std::asin(a);
        case Function::acos: return std::acos(a);
        case Function::atan: return std::atan(a);
        case Function::sinh: return std::sinh(a);
        case Function::cosh: return std::cosh(a);
        case Function::tanh: return std::tanh(a);
        case Function::exp: return std::exp(a);
        case Function::ln:
        case Function::log: return std::log(a);
        case Function::log10: return std::log10(a);
        case Function::sqrt: return std::sqrt(a);
        case Function::abs: return std::fabs(a);
        case Function::pow: return std::pow(a, b);
        case Function::min: return std::fmin(a, b);
        case Function::max: return std::fmax(a, b);
    }
    return std::nan("");
}

double apply(BinaryOp op, double a, double b) noexcept {
    switch (op) {
        case BinaryOp::add: return a + b;
        case BinaryOp::sub: return a - b;
        case BinaryOp::mul: return a * b;
        case BinaryOp::div: return a / b;
        case BinaryOp::pow: return std::pow(a, b);
    }
    return std::nan("");
}

double interpret(const Expression& e, const Binding& at) {
    return std::visit(
        [&](const auto& n) -> double {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, NumberLiteral>) {
                return n.value;
            } else if constexpr (std::is_same_v<T, Variable>) {
                auto it = at.find(n.name);
                if (it == at.end()) throw UnboundVariable(n.name);
                return it->second;
            } else if constexpr (std::is_same_v<T, Unary>) {
                return -interpret(*n.child, at);
            } else if constexpr (std::is_same_v<T, Binary>) {
                const double a = interpret(*n.left, at);
                return apply(n.op, a, interpret(*n.right, at));
            } else {
                const double a = interpret(*n.args[0], at);
                const double b = n.args.size() > 1 ? interpret(*n.args[1], at) : 0.0;
                return apply(n.function, a, b);
            }
        },
        e.node());
}

void collect(const Expression& e, std::vector<std::string>& out) {
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Variable>) {
                for (const auto& name : out) {
                    if (name == n.name) return;
                }
                out.push_back(n.name);
            } else if constexpr (std::is_same_v<T, Unary>) {
                collect(*n.child, out);
            } else if constexpr (std::is_same_v<T, Binary>) {
                collect(*n.left, out);
                collect(*n.right, out);
            } else if constexpr (std::is_same_v<T, Call>) {
                for (const auto& a : n.args) collect(*a, out);
            }
        },
        e.node());
}

void print(const Expression& e, std::string& out) {
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, NumberLiteral>) {
                char buf[32];
                std::snprintf(buf, sizeof buf, "%.17g", n.value);
                if (n.value < 0 || std::signbit(n.value)) {
                    out += '(';
                    out += buf;
                    out += ')';
                } else {
                    out += buf;
                }
            } else if constexpr (std::is_same_v<T, Variable>) {
                out += n.name;
            } else if constexpr (std::is_same_v<T, Unary>) {
                out += "(-";
                print(*n.child, out);
                out += ')';
            } else if constexpr (std::is_same_v<T, Binary>) {
                static constexpr std::array<char, 5> sym{'+', '-', '*', '/', '^'};
                out += '(';
                print(*n.left, out);
                out += sym[static_cast<std::size_t>(n.op)];
                print(*n.right, out);
                out += ')';
            } else {
                out += function_name(n.function);
                out += '(';
                for (std::size_t i = 0; i < n.args.size(); ++i) {
                    if (i) out += ',';
                    print(*n.args[i], out);
                }
                out += ')';
            }
        },
        e.node());
}

}  // namespace

// ---- function table -----------------------------------------------------------

std::string_view function_name(Function fn) noexcept { return info(fn).name; }
std::size_t function_arity(Function fn) noexcept { return info(fn).arity; }

std::optional<Function> lookup_function(std::string_view name) noexcept {
    for (const auto& f : kFunctions) {
        if (f.name == name) return f.fn;
    }
    return std::nullopt;
}

bool is_reserved_name(std::string_view name) noexcept {
    return name == "pi" || name == "e" || name == "Math" || lookup_function(name).has_value();
}

// ---- Expression ---------------------------------------------------------------

Expression::Expression(Node node) : node_(std::make_shared<const Node>(std::move(node))) {}

Expression Expression::number(double value) { return Expression(NumberLiteral{value}); }

Expression Expression::variable(std::string name) {
    if (name.empty() || !is_ident_start(name.front())) {
        throw InvalidArgument("invalid variable name '" + name + "'");
    }
    for (char c : name) {
        if (!is_ident_char(c)) throw InvalidArgument("invalid variable name '" + name + "'");
    }
    if (is_reserved_name(name)) throw InvalidArgument("'" + name + "' is a reserved name");
    return Expression(Variable{std::move(name)});
}

Expression Expression::unary(UnaryOp op, Expression child) {
    return Expression(Unary{op, std::make_shared<const Expression>(std::move(child))});
}

Expression Expression::binary(BinaryOp op, Expression left, Expression right) {
    return Expression(Binary{op, std::make_shared<const Expression>(std::move(left)),
                             std::make_shared<const Expression>(std::move(right))});
}

Expression Expression::call(Function fn, std::vector<Expression> args) {
    if (args.size() != function_arity(fn)) {
        throw ArityMismatch(0, std::string(function_name(fn)), function_arity(fn), args.size());
    }
    Call c{fn, {}};
    c.args.reserve(args.size());
    for (auto& a : args) c.args.push_back(std::make_shared<const Expression>(std::move(a)));
    return Expression(std::move(c));
}

bool operator==(const Expression& a, const Expression& b) {
    if (a.node_ == b.node_) return true;
    if (a.node_->index() != b.node_->index()) return false;
    return std::visit(
        [&](const auto& x) -> bool {
            using T = std::decay_t<decltype(x)>;
            const auto& y = std::get<T>(*b.node_);
            if constexpr (std::is_same_v<T, NumberLiteral>) {
                // bitwise-equal literals, so NaN never appears and -0 != +0
                return std::signbit(x.value) == std::signbit(y.value) && x.value == y.value;
            } else if constexpr (std::is_same_v<T, Variable>) {
                return x.name == y.name;
            } else if constexpr (std::is_same_v<T, Unary>) {
                return x.op == y.op && *x.child == *y.child;
            } else if constexpr (std::is_same_v<T, Binary>) {
                return x.op == y.op && *x.left == *y.left && *x.right == *y.right;
            } else {
                if (x.function != y.function || x.args.size() != y.args.size()) return false;
                for (std::size_t i = 0; i < x.args.size(); ++i) {
                    if (!(*x.args[i] == *y.args[i])) return false;
                }
                return true;
            }
        },
        *a.node_);
}

// ---- free functions -----------------------------------------------------------

Expression parse(std::string_view source) {
    bool blank = true;
    for (char c : source) {
        if (std::isspace(static_cast<unsigned char>(c)) == 0) {
            blank = false;
            break;
        }
    }
    if (blank) throw SyntaxError(0, "empty expression");
    return Parser(Lexer(source).run()).run();
}

double evaluate(const Expression& expr, const Binding& at) {
    const double v = interpret(expr, at);
    if (!std::isfinite(v)) {
        throw NonFiniteResult("expression " + to_string(expr) + " evaluated to a non-finite value");
    }
    return v;
}

std::vector<std::string> free_variables(const Expression& expr) {
    std::vector<std::string> out;
    collect(expr, out);
    return out;
}

std::string to_string(const Expression& expr) {
    std::string out;
    print(expr, out);
    return out;
}

// ---- CompiledExpression -------------------------------------------------------

CompiledExpression::CompiledExpression(const Expression& expr,
                                       std::span<const std::string> variables)
    : arity_(variables.size()) {
    emit(expr, variables, 0);
}

void CompiledExpression::emit(const Expression& expr, std::span<const std::string> variables,
                              std::size_t depth) {
    const auto push = [&](Instruction ins, std::size_t d) {
        code_.push_back(ins);
        if (d > max_depth_) max_depth_ = d;
    };
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, NumberLiteral>) {
                push({Op::constant, 0, n.value}, depth + 1);
            } else if constexpr (std::is_same_v<T, Variable>) {
                for (std::size_t i = 0; i < variables.size(); ++i) {
                    if (variables[i] == n.name) {
                        push({Op::load, static_cast<std::uint32_t>(i), 0.0}, depth + 1);
                        return;
                    }
                }
                throw UnboundVariable(n.name);
            } else if constexpr (std::is_same_v<T, Unary>) {
                emit(*n.child, variables, depth);
                push({Op::neg}, depth + 1);
            } else if constexpr (std::is_same_v<T, Binary>) {
                emit(*n.left, variables, depth);
                emit(*n.right, variables, depth + 1);
                static constexpr std::array<Op, 5> ops{Op::add, Op::sub, Op::mul, Op::div,
                                                       Op::pow};
                push({ops[static_cast<std::size_t>(n.op)]}, depth + 1);
            } else {
                for (std::size_t i = 0; i < n.args.size(); ++i) {
                    emit(*n.args[i], variables, depth + i);
                }
                Op op{};
                switch (n.function) {
                    case Function::sin: op = Op::sin; break;
                    case Function::cos: op = Op::cos; break;
                    case Function::tan: op = Op::tan; break;
                    case Function::asin: op = Op::asin; break;
                    case Function::acos: op = Op::acos; break;
                    case Function::atan: op = Op::atan; break;
                    case Function::sinh: op = Op::sinh; break;
                    case Function::cosh: op = Op::cosh; break;
                    case Function::tanh: op = Op::tanh; break;
                    case Function::exp: op = Op::exp; break;
                    case Function::ln:
                    case Function::log: op = Op::ln; break;
                    case Function::log10: op = Op::log10; break;
                    case Function::sqrt: op = Op::sqrt; break;
                    case Function::abs: op = Op::abs; break;
                    case Function::pow: op = Op::pow2; break;
                    case Function::min: op = Op::min2; break;
                    case Function::max: op = Op::max2; break;
                }
                push({op}, depth + 1);
            }
        },
        expr.node());
}

#if defined(__GNUC__) && !defined(__clang__)
#pragma GCC diagnostic push
#pragma GCC diagnostic ignored "-Wmaybe-uninitialized"
#endif
double CompiledExpression::operator()(std::span<const double> values) const noexcept {
    constexpr std::size_t kInline = 64;
    std::array<double, kInline> inline_stack;
    std::vector<double> heap;
    double* stack = inline_stack.data();
    if (max_depth_ > kInline) {
        heap.resize(max_depth_);
        stack = heap.data();
    }
    std::size_t top = 0;  // number of live entries
    for (const Instruction& ins : code_) {
        switch (ins.op) {
            case Op::constant: stack[top++] = ins.constant; break;
            case Op::load: stack[top++] = values[ins.slot]; break;
            case Op::neg: stack[top - 1] = -stack[top - 1]; break;
            case Op::add: --top; stack[top - 1] += stack[top]; break;
            case Op::sub: --top; stack[top - 1] -= stack[top]; break;
            case Op::mul: --top; stack[top - 1] *= stack[top]; break;
            case Op::div: --top; stack[top - 1] /= stack[top]; break;
            case Op::pow:
            case Op::pow2: --top; stack[top - 1] = std::pow(stack[top - 1], stack[top]); break;
            case Op::min2: --top; stack[top - 1] = std::fmin(stack[top - 1], stack[top]); break;
            case Op::max2: --top; stack[top - 1] = std::fmax(stack[top - 1], stack[top]); break;
            case Op::sin: stack[top - 1] = std::sin(stack[top - 1]); break;
            case Op::cos: stack[top - 1] = std::cos(stack[top - 1]); break;
            case Op::tan: stack[top - 1] = std::tan(stack[top - 1]); break;
            case Op::asin: stack[top - 1] = std::asin(stack[top - 1]); break;
            case Op::acos: stack[top - 1] = std::acos(stack[top - 1]); break;
            case Op::atan: stack[top - 1] = std::atan(stack[top - 1]); break;
            case Op::sinh: stack[top - 1] = std::sinh(stack[top - 1]); break;
            case Op::cosh: stack[top - 1] = std::cosh(stack[top - 1]); break;
            case Op::tanh: stack[top - 1] = std::tanh(stack[top - 1]); break;
            case Op::exp: stack[top - 1] = std::exp(stack[top - 1]); break;
            case Op::ln: stack[top - 1] = std::log(stack[top - 1]); break;
            case Op::log10: stack[top - 1] = std::log10(stack[top - 1]); break;
            case Op::sqrt: stack[top - 1] = std::sqrt(stack[top - 1]); break;
            case Op::abs: stack[top - 1] = std::fabs(stack[top - 1]); break;
        }
    }
    return stack[0];
}
#if defined(__GNUC__) && !defined(__clang__)
#pragma GCC diagnostic pop
#endif

}  // namespace varsens
