#ifndef STIELTJES_EXPR_HPP
#define STIELTJES_EXPR_HPP

// A small deterministic arithmetic language used to write fields, densities and
// bracket functions in configuration files.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' unary)?          right associative
//   primary := number | name | name '(' expr (',' expr)* ')' | '(' expr ')'
//
// Functions: sin cos exp log floor abs sqrt (one argument), max min (two).
// The name `pi` is the constant pi; every other name is a variable.

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace stieltjes {

enum class UnaryOp : std::uint8_t { negate };
enum class BinaryOp : std::uint8_t { add, sub, mul, div, pow };
enum class Function : std::uint8_t { sin, cos, exp, log, floor, abs, max, min, sqrt };

std::string_view function_name(Function fn) noexcept;
std::size_t function_arity(Function fn) noexcept;

class Expr;

namespace expr_node {
struct Constant {
    double value;
};
struct Variable {
    std::string name;
};
struct Unary {
    UnaryOp op;
    std::shared_ptr<const Expr> operand;
};
struct Binary {
    BinaryOp op;
    std::shared_ptr<const Expr> lhs;
    std::shared_ptr<const Expr> rhs;
};
struct Call {
    Function fn;
    std::vector<std::shared_ptr<const Expr>> args;
};
} // namespace expr_node

/// Immutable expression tree. Copies share structure.
class Expr {
public:
    using Node = std::variant<expr_node::Constant, expr_node::Variable, expr_node::Unary,
                              expr_node::Binary, expr_node::Call>;

    explicit Expr(Node node);

    static Expr constant(double value);
    static Expr variable(std::string name);
    static Expr unary(UnaryOp op, Expr operand);
    static Expr binary(BinaryOp op, Expr lhs, Expr rhs);
    static Expr call(Function fn, std::vector<Expr> args);

    const Node& node() const noexcept { return *node_; }

    /// Names of all variables referenced by the tree.
    std::set<std::string> variables() const;

    friend bool operator==(const Expr& a, const Expr& b);

private:
    std::shared_ptr<const Node> node_;
};

using Env = std::map<std::string, double, std::less<>>;

/// Parses `text`. Throws SyntaxError, UnknownFunction or ArityMismatch.
Expr parse(std::string_view text);

/// Fully parenthesized text that parses back to a structurally identical tree.
std::string to_string(const Expr& e);

/// Tree-walking evaluation. Throws UnboundVariable or DomainError.
double eval(const Expr& e, const Env& env);

/// An expression with its variables resolved to positions in a flat slot array.
/// Evaluation is a stack machine over a precompiled program; results are
/// bit-identical to eval() for the same inputs.
class CompiledExpr {
public:
    CompiledExpr() = default;

    /// Throws UnboundVariable if `e` references a name missing from `slots`.
    CompiledExpr(const Expr& e, std::span<const std::string> slots);

    double operator()(std::span<const double> slot_values) const;

    std::size_t slot_count() const noexcept { return slot_count_; }

    struct Instr {
        enum class Op : std::uint8_t { constant, slot, negate, binary, call };
        Op op;
        BinaryOp bop{};
        Function fn{};
        std::uint32_t slot{};
        double value{};
    };

private:
    std::vector<Instr> program_;
    std::size_t max_depth_ = 0;
    std::size_t slot_count_ = 0;
};

/// Compiles `text` against the slot layout [t, params...]; convenient for
/// scalar functions of time such as densities and bracket bounds.
class TimeFunction {
public:
    TimeFunction() = default;
    TimeFunction(const Expr& e, const Env& params);
    double operator()(double t) const;

private:
    CompiledExpr code_;
    std::vector<double> frame_;
};

} // namespace stieltjes

#endif // STIELTJES_EXPR_HPP
