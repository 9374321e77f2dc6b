#include "stieltjes/error.hpp"
#include "stieltjes/expr.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <numbers>
#include <random>
#include <variant>

using namespace stieltjes;

TEST(Expr, ParsesFieldWithMulAndFloor)
{
    const Expr e = parse("r*y1*(floor(y2)-y1)");
    const auto* top = std::get_if<expr_node::Binary>(&e.node());
    ASSERT_NE(top, nullptr);
    EXPECT_EQ(top->op, BinaryOp::mul);
    EXPECT_EQ(e.variables(), (std::set<std::string>{"r", "y1", "y2"}));
    EXPECT_NE(to_string(e).find("floor"), std::string::npos);
    EXPECT_DOUBLE_EQ(eval(e, {{"r", 2.0}, {"y1", 1.5}, {"y2", 4.9}}), 2.0 * 1.5 * (4.0 - 1.5));
}

TEST(Expr, TwoOverPi)
{
    EXPECT_EQ(eval(parse("2/pi"), {}), 2.0 / std::numbers::pi);
}

TEST(Expr, TrailingOperatorIsSyntaxErrorAtOffset2)
{
    try {
        parse("1+");
        FAIL() << "no throw";
    } catch (const SyntaxError& e) {
        EXPECT_EQ(e.offset(), 2u);
    }
}

TEST(Expr, Evaluation)
{
    EXPECT_EQ(eval(parse("floor(3.7)"), {}), 3.0);
    EXPECT_EQ(eval(parse("max(sin(pi*t),0)"), {{"t", 0.5}}), 1.0);
    EXPECT_EQ(eval(parse("max(sin(pi*t),0)"), {{"t", 1.5}}), 0.0);
}

TEST(Expr, PrecedenceAndAssociativity)
{
    EXPECT_EQ(eval(parse("2^3^2"), {}), 512.0);
    EXPECT_EQ(eval(parse("-2^2"), {}), -4.0);
    EXPECT_EQ(eval(parse("2^-1"), {}), 0.5);
    EXPECT_EQ(eval(parse("8/4/2"), {}), 1.0);
    EXPECT_EQ(eval(parse("1-2-3"), {}), -4.0);
    EXPECT_EQ(eval(parse("1+2*3"), {}), 7.0);
}

TEST(Expr, Errors)
{
    EXPECT_THROW(parse("foo(1)"), UnknownFunction);
    EXPECT_THROW(parse("max(1)"), ArityMismatch);
    EXPECT_THROW(parse("sin(1,2)"), ArityMismatch);
    EXPECT_THROW(parse("(1"), SyntaxError);
    EXPECT_THROW(parse(""), SyntaxError);
    EXPECT_THROW(eval(parse("x+1"), {}), UnboundVariable);
    EXPECT_THROW(eval(parse("log(0)"), {}), DomainError);
    EXPECT_THROW(eval(parse("1/0"), {}), DomainError);
    EXPECT_THROW(eval(parse("sqrt(-1)"), {}), DomainError);
}

TEST(Expr, ToStringRoundTripsStructurally)
{
    for (const char* s : {"r*y1*(floor(y2)-y1)", "-x^2", "a-(b-c)", "min(x, max(y, 2))/3", "1e-3*exp(-t)",
                          "2^3^2", "-(-x)"}) {
        const Expr e = parse(s);
        EXPECT_EQ(parse(to_string(e)), e) << s;
    }
}

TEST(Expr, CompiledMatchesTreeWalkBitwise)
{
    const Expr e = parse("a*sin(w*t + p) - t^2/(1 + abs(y1)) + min(y1, floor(3*t)) + exp(-t)*sqrt(4+t)");
    const std::vector<std::string> slots{"t", "y1", "a", "w", "p"};
    const CompiledExpr c(e, slots);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(-3.0, 3.0);
    for (int k = 0; k < 1000; ++k) {
        const std::vector<double> v{U(rng), U(rng), U(rng), U(rng), U(rng)};
        const double a = c(v);
        const double b = eval(e, {{"t", v[0]}, {"y1", v[1]}, {"a", v[2]}, {"w", v[3]}, {"p", v[4]}});
        EXPECT_EQ(std::memcmp(&a, &b, sizeof a), 0);
    }
    EXPECT_THROW(CompiledExpr(e, std::vector<std::string>{"t"}), UnboundVariable);
}

TEST(Expr, TimeFunction)
{
    const TimeFunction f(parse("k*t + 1"), {{"k", 2.0}});
    EXPECT_EQ(f(3.0), 7.0);
}
