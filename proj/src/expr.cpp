#include "stieltjes/expr.hpp"

#include "stieltjes/error.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <numbers>
#include <optional>

namespace stieltjes {

namespace {

struct FunctionInfo {
    std::string_view name;
    Function fn;
    std::size_t arity;
};

constexpr std::array<FunctionInfo, 9> kFunctions{{
    {"sin", Function::sin, 1},
    {"cos", Function::cos, 1},
    {"exp", Function::exp, 1},
    {"log", Function::log, 1},
    {"floor", Function::floor, 1},
    {"abs", Function::abs, 1},
    {"max", Function::max, 2},
    {"min", Function::min, 2},
    {"sqrt", Function::sqrt, 1},
}};

std::optional<FunctionInfo> lookup_function(std::string_view name)
{
    for (const auto& info : kFunctions) {
        if (info.name == name) return info;
    }
    return std::nullopt;
}

// The arithmetic kernels are shared by the tree walker and the stack machine so
// both evaluation routes produce identical bits.

double apply_binary(BinaryOp op, double a, double b)
{
    switch (op) {
    case BinaryOp::add: return a + b;
    case BinaryOp::sub: return a - b;
    case BinaryOp::mul: return a * b;
    case BinaryOp::div:
        if (b == 0.0) throw DomainError("division by zero");
        return a / b;
    case BinaryOp::pow: {
        const double r = std::pow(a, b);
        if (std::isnan(r) && !std::isnan(a) && !std::isnan(b))
            throw DomainError("power undefined for base " + std::to_string(a) + " and exponent "
                              + std::to_string(b));
        return r;
    }
    }
    return 0.0;
}

double apply_call(Function fn, double x, double y)
{
    switch (fn) {
    case Function::sin: return std::sin(x);
    case Function::cos: return std::cos(x);
    case Function::exp: return std::exp(x);
    case Function::log:
        if (!(x > 0.0)) throw DomainError("log of non-positive value " + std::to_string(x));
        return std::log(x);
    case Function::floor: return std::floor(x);
    case Function::abs: return std::fabs(x);
    case Function::max: return std::fmax(x, y);
    case Function::min: return std::fmin(x, y);
    case Function::sqrt:
        if (x < 0.0) throw DomainError("sqrt of negative value " + std::to_string(x));
        return std::sqrt(x);
    }
    return 0.0;
}

char binary_symbol(BinaryOp op)
{
    switch (op) {
    case BinaryOp::add: return '+';
    case BinaryOp::sub: return '-';
    case BinaryOp::mul: return '*';
    case BinaryOp::div: return '/';
    case BinaryOp::pow: return '^';
    }
    return '?';
}

// ---- parser ---------------------------------------------------------------

class Parser {
public:
    explicit Parser(std::string_view text)
        : text_(text)
    {}

    Expr parse_all()
    {
        Expr e = parse_sum();
        skip_ws();
        if (pos_ != text_.size())
            throw SyntaxError(pos_, {"operator", "end of input"},
                              std::string("unexpected '") + text_[pos_] + "'");
        return e;
    }

private:
    void skip_ws()
    {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n'
                                       || text_[pos_] == '\r'))
            ++pos_;
    }

    bool accept(char c)
    {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    Expr parse_sum()
    {
        Expr lhs = parse_product();
        for (;;) {
            if (accept('+'))
                lhs = Expr::binary(BinaryOp::add, lhs, parse_product());
            else if (accept('-'))
                lhs = Expr::binary(BinaryOp::sub, lhs, parse_product());
            else
                return lhs;
        }
    }

    Expr parse_product()
    {
        Expr lhs = parse_unary();
        for (;;) {
            if (accept('*'))
                lhs = Expr::binary(BinaryOp::mul, lhs, parse_unary());
            else if (accept('/'))
                lhs = Expr::binary(BinaryOp::div, lhs, parse_unary());
            else
                return lhs;
        }
    }

    Expr parse_unary()
    {
        if (accept('-')) return Expr::unary(UnaryOp::negate, parse_unary());
        if (accept('+')) return parse_unary();
        return parse_power();
    }

    Expr parse_power()
    {
        Expr base = parse_primary();
        if (accept('^')) return Expr::binary(BinaryOp::pow, base, parse_unary());
        return base;
    }

    static bool is_ident_start(char c)
    {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
    }
    static bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }
    static bool is_digit(char c) { return c >= '0' && c <= '9'; }

    Expr parse_primary()
    {
        skip_ws();
        static const std::vector<std::string> kOperand{"number", "name", "'('", "'-'"};
        if (pos_ >= text_.size()) throw SyntaxError(pos_, kOperand, "unexpected end of input");

        const char c = text_[pos_];
        if (is_digit(c) || c == '.') return parse_number();
        if (is_ident_start(c)) {
            const std::size_t start = pos_;
            while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
            const std::string name(text_.substr(start, pos_ - start));
            if (accept('(')) return parse_call(name);
            if (name == "pi") return Expr::constant(std::numbers::pi);
            return Expr::variable(name);
        }
        if (accept('(')) {
            Expr inner = parse_sum();
            if (!accept(')')) throw SyntaxError(pos_, {"')'"}, "unbalanced parenthesis");
            return inner;
        }
        throw SyntaxError(pos_, kOperand, std::string("unexpected '") + c + "'");
    }

    Expr parse_call(const std::string& name)
    {
        const auto info = lookup_function(name);
        if (!info) throw UnknownFunction(name);
        std::vector<Expr> args;
        skip_ws();
        if (!accept(')')) {
            for (;;) {
                args.push_back(parse_sum());
                if (accept(',')) continue;
                if (accept(')')) break;
                throw SyntaxError(pos_, {"','", "')'"}, "malformed argument list");
            }
        }
        if (args.size() != info->arity) throw ArityMismatch(name, info->arity, args.size());
        return Expr::call(info->fn, std::move(args));
    }

    Expr parse_number()
    {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t p = pos_ + 1;
            if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
            if (p < text_.size() && is_digit(text_[p])) {
                while (p < text_.size() && is_digit(text_[p])) ++p;
                pos_ = p;
            }
        }
        double value = 0.0;
        const char* first = text_.data() + start;
        const char* last = text_.data() + pos_;
        const auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec == std::errc::result_out_of_range) {
            value = std::strtod(std::string(first, last).c_str(), nullptr);
        } else if (ec != std::errc{} || ptr != last) {
            throw SyntaxError(start, {"number"}, "malformed number");
        }
        return Expr::constant(value);
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

void collect_variables(const Expr& e, std::set<std::string>& out)
{
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, expr_node::Variable>) {
                out.insert(n.name);
            } else if constexpr (std::is_same_v<T, expr_node::Unary>) {
                collect_variables(*n.operand, out);
            } else if constexpr (std::is_same_v<T, expr_node::Binary>) {
                collect_variables(*n.lhs, out);
                collect_variables(*n.rhs, out);
            } else if constexpr (std::is_same_v<T, expr_node::Call>) {
                for (const auto& a : n.args) collect_variables(*a, out);
            }
        },
        e.node());
}

void print(const Expr& e, std::string& out)
{
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, expr_node::Constant>) {
                std::array<char, 64> buf{};
                const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), n.value);
                const std::string_view digits(buf.data(), static_cast<std::size_t>(res.ptr - buf.data()));
                if (n.value < 0) {
                    out += '(';
                    out += digits;
                    out += ')';
                } else {
                    out += digits;
                }
            } else if constexpr (std::is_same_v<T, expr_node::Variable>) {
                out += n.name;
            } else if constexpr (std::is_same_v<T, expr_node::Unary>) {
                out += "(-";
                print(*n.operand, out);
                out += ')';
            } else if constexpr (std::is_same_v<T, expr_node::Binary>) {
                out += '(';
                print(*n.lhs, out);
                out += binary_symbol(n.op);
                print(*n.rhs, out);
                out += ')';
            } else if constexpr (std::is_same_v<T, expr_node::Call>) {
                out += function_name(n.fn);
                out += '(';
                for (std::size_t k = 0; k < n.args.size(); ++k) {
                    if (k) out += ',';
                    print(*n.args[k], out);
                }
                out += ')';
            }
        },
        e.node());
}

double eval_tree(const Expr& e, const Env& env)
{
    return std::visit(
        [&](const auto& n) -> double {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, expr_node::Constant>) {
                return n.value;
            } else if constexpr (std::is_same_v<T, expr_node::Variable>) {
                const auto it = env.find(n.name);
                if (it == env.end()) throw UnboundVariable(n.name);
                return it->second;
            } else if constexpr (std::is_same_v<T, expr_node::Unary>) {
                return -eval_tree(*n.operand, env);
            } else if constexpr (std::is_same_v<T, expr_node::Binary>) {
                const double a = eval_tree(*n.lhs, env);
                const double b = eval_tree(*n.rhs, env);
                return apply_binary(n.op, a, b);
            } else {
                const double x = eval_tree(*n.args[0], env);
                const double y = n.args.size() > 1 ? eval_tree(*n.args[1], env) : 0.0;
                return apply_call(n.fn, x, y);
            }
        },
        e.node());
}

using Instr = CompiledExpr::Instr;

// Emits postfix code; returns the stack depth needed by the subtree.
std::size_t emit(const Expr& e, std::span<const std::string> slots, std::vector<Instr>& code)
{
    return std::visit(
        [&](const auto& n) -> std::size_t {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, expr_node::Constant>) {
                code.push_back({Instr::Op::constant, {}, {}, 0, n.value});
                return 1;
            } else if constexpr (std::is_same_v<T, expr_node::Variable>) {
                for (std::size_t k = 0; k < slots.size(); ++k) {
                    if (slots[k] == n.name) {
                        code.push_back({Instr::Op::slot, {}, {}, static_cast<std::uint32_t>(k), 0.0});
                        return 1;
                    }
                }
                throw UnboundVariable(n.name);
            } else if constexpr (std::is_same_v<T, expr_node::Unary>) {
                const std::size_t d = emit(*n.operand, slots, code);
                code.push_back({Instr::Op::negate, {}, {}, 0, 0.0});
                return d;
            } else if constexpr (std::is_same_v<T, expr_node::Binary>) {
                const std::size_t dl = emit(*n.lhs, slots, code);
                const std::size_t dr = emit(*n.rhs, slots, code);
                code.push_back({Instr::Op::binary, n.op, {}, 0, 0.0});
                return std::max(dl, dr + 1);
            } else {
                std::size_t depth = 0;
                for (std::size_t k = 0; k < n.args.size(); ++k)
                    depth = std::max(depth, emit(*n.args[k], slots, code) + k);
                code.push_back({Instr::Op::call, {}, n.fn, static_cast<std::uint32_t>(n.args.size()), 0.0});
                return depth;
            }
        },
        e.node());
}

} // namespace

std::string_view function_name(Function fn) noexcept
{
    for (const auto& info : kFunctions) {
        if (info.fn == fn) return info.name;
    }
    return "?";
}

std::size_t function_arity(Function fn) noexcept
{
    for (const auto& info : kFunctions) {
        if (info.fn == fn) return info.arity;
    }
    return 0;
}

Expr::Expr(Node node)
    : node_(std::make_shared<const Node>(std::move(node)))
{}

Expr Expr::constant(double value) { return Expr(expr_node::Constant{value}); }

Expr Expr::variable(std::string name) { return Expr(expr_node::Variable{std::move(name)}); }

Expr Expr::unary(UnaryOp op, Expr operand)
{
    return Expr(expr_node::Unary{op, std::make_shared<const Expr>(std::move(operand))});
}

Expr Expr::binary(BinaryOp op, Expr lhs, Expr rhs)
{
    return Expr(expr_node::Binary{op, std::make_shared<const Expr>(std::move(lhs)),
                                  std::make_shared<const Expr>(std::move(rhs))});
}

Expr Expr::call(Function fn, std::vector<Expr> args)
{
    if (args.size() != function_arity(fn))
        throw ArityMismatch(std::string(function_name(fn)), function_arity(fn), args.size());
    std::vector<std::shared_ptr<const Expr>> ptrs;
    ptrs.reserve(args.size());
    for (auto& a : args) ptrs.push_back(std::make_shared<const Expr>(std::move(a)));
    return Expr(expr_node::Call{fn, std::move(ptrs)});
}

std::set<std::string> Expr::variables() const
{
    std::set<std::string> out;
    collect_variables(*this, out);
    return out;
}

bool operator==(const Expr& a, const Expr& b)
{
    if (a.node_ == b.node_) return true;
    if (a.node().index() != b.node().index()) return false;
    return std::visit(
        [&](const auto& x) -> bool {
            using T = std::decay_t<decltype(x)>;
            const auto& y = std::get<T>(b.node());
            if constexpr (std::is_same_v<T, expr_node::Constant>) {
                return std::bit_cast<std::uint64_t>(x.value) == std::bit_cast<std::uint64_t>(y.value);
            } else if constexpr (std::is_same_v<T, expr_node::Variable>) {
                return x.name == y.name;
            } else if constexpr (std::is_same_v<T, expr_node::Unary>) {
                return x.op == y.op && *x.operand == *y.operand;
            } else if constexpr (std::is_same_v<T, expr_node::Binary>) {
                return x.op == y.op && *x.lhs == *y.lhs && *x.rhs == *y.rhs;
            } else {
                if (x.fn != y.fn || x.args.size() != y.args.size()) return false;
                for (std::size_t k = 0; k < x.args.size(); ++k) {
                    if (!(*x.args[k] == *y.args[k])) return false;
                }
                return true;
            }
        },
        a.node());
}

Expr parse(std::string_view text) { return Parser(text).parse_all(); }

std::string to_string(const Expr& e)
{
    std::string out;
    print(e, out);
    return out;
}

double eval(const Expr& e, const Env& env) { return eval_tree(e, env); }

CompiledExpr::CompiledExpr(const Expr& e, std::span<const std::string> slots)
    : slot_count_(slots.size())
{
    max_depth_ = emit(e, slots, program_);
}

double CompiledExpr::operator()(std::span<const double> slot_values) const
{
    constexpr std::size_t kInline = 32;
    std::array<double, kInline> inline_stack;
    std::vector<double> heap_stack;
    double* stack = inline_stack.data();
    if (max_depth_ > kInline) {
        heap_stack.resize(max_depth_);
        stack = heap_stack.data();
    }
    std::size_t sp = 0;
    for (const Instr& ins : program_) {
        switch (ins.op) {
        case Instr::Op::constant: stack[sp++] = ins.value; break;
        case Instr::Op::slot: stack[sp++] = slot_values[ins.slot]; break;
        case Instr::Op::negate: stack[sp - 1] = -stack[sp - 1]; break;
        case Instr::Op::binary:
            stack[sp - 2] = apply_binary(ins.bop, stack[sp - 2], stack[sp - 1]);
            --sp;
            break;
        case Instr::Op::call:
            if (ins.slot == 2) {
                stack[sp - 2] = apply_call(ins.fn, stack[sp - 2], stack[sp - 1]);
                --sp;
            } else {
                stack[sp - 1] = apply_call(ins.fn, stack[sp - 1], 0.0);
            }
            break;
        }
    }
    return sp ? stack[0] : 0.0;
}

TimeFunction::TimeFunction(const Expr& e, const Env& params)
{
    std::vector<std::string> slots{"t"};
    frame_.push_back(0.0);
    for (const auto& [name, value] : params) {
        slots.push_back(name);
        frame_.push_back(value);
    }
    code_ = CompiledExpr(e, slots);
}

double TimeFunction::operator()(double t) const
{
    constexpr std::size_t kInline = 32;
    if (frame_.size() <= kInline) {
        std::array<double, kInline> frame;
        std::copy(frame_.begin(), frame_.end(), frame.begin());
        frame[0] = t;
        return code_(std::span<const double>(frame.data(), frame_.size()));
    }
    std::vector<double> frame = frame_;
    frame[0] = t;
    return code_(frame);
}

} // namespace stieltjes
