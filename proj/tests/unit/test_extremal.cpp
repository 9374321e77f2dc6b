#include "stieltjes/error.hpp"
#include "stieltjes/expr.hpp"
#include "stieltjes/extremal.hpp"
#include "stieltjes/models.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace stieltjes;

namespace {
Field expr_field(std::vector<std::string> comps, const Env& params = {})
{
    std::vector<Expr> regular;
    std::vector<std::optional<Expr>> jumps(comps.size());
    for (const auto& c : comps) regular.push_back(parse(c));
    return Field::from_exprs(regular, jumps, params);
}

std::vector<double> nodes01(std::size_t m)
{
    std::vector<double> n;
    for (std::size_t k = 0; k <= m; ++k) n.push_back(static_cast<double>(k) / static_cast<double>(m));
    return n;
}

const Interval w01{0.0, 1.0};
const VectorIntegrator id01({Integrator(w01, AcPart::identity())});
} // namespace

TEST(Verify, DecayCandidates)
{
    const Field f = expr_field({"-y1"});
    const std::vector<double> y0{1.0};
    const auto n = nodes01(200);
    const std::vector<RegulatedGrid> exact{RegulatedGrid::sample([](double t) { return std::exp(-t); }, n)};
    const auto lo = verify_lower(exact, f, id01, y0);
    EXPECT_TRUE(lo.passed);
    EXPECT_LE(lo.worst_violation, 1e-8);
    EXPECT_TRUE(verify_upper(exact, f, id01, y0).passed);

    const std::vector<RegulatedGrid> up{RegulatedGrid::sample([](double t) { return std::exp(-t) + 1.0; }, n)};
    EXPECT_TRUE(verify_upper(up, f, id01, y0).passed);
    EXPECT_FALSE(verify_lower(up, f, id01, y0).passed);
    const std::vector<RegulatedGrid> down{RegulatedGrid::sample([](double t) { return std::exp(-t) - 1.0; }, n)};
    EXPECT_TRUE(verify_lower(down, f, id01, y0).passed);
    EXPECT_FALSE(verify_upper(down, f, id01, y0).passed);
}

TEST(Verify, JumpInequality)
{
    const Interval w{0.0, 1.0};
    const VectorIntegrator vg({Integrator(w, AcPart::none(), {{0.5, 1.0}})});
    const Field f = expr_field({"y1"});
    // exact: y = 1, then 2 after 0.5
    const std::vector<RegulatedGrid> exact{RegulatedGrid::from_jumps({0.0, 0.5, 1.0}, {1.0, 1.0, 2.0}, {0.0, 1.0, 0.0})};
    EXPECT_TRUE(verify_lower(exact, f, vg, std::vector<double>{1.0}).passed);
    const std::vector<RegulatedGrid> big{RegulatedGrid::from_jumps({0.0, 0.5, 1.0}, {1.0, 1.0, 3.0}, {0.0, 2.0, 0.0})};
    const auto r = verify_lower(big, f, vg, std::vector<double>{1.0});
    EXPECT_FALSE(r.passed);
    EXPECT_NEAR(r.worst_violation, 1.0, 1e-12);
    const std::vector<RegulatedGrid> missing{RegulatedGrid::constant(1.0, {0.0, 1.0})};
    EXPECT_THROW(verify_lower(missing, f, vg, std::vector<double>{1.0}), MeshMissingJump);
}

TEST(Quasimonotone, Examples)
{
    const auto n = nodes01(10);
    const Bracket b1{{RegulatedGrid::constant(-1.0, n)}, {RegulatedGrid::constant(1.0, n)}};
    EXPECT_TRUE(check_quasimonotone(expr_field({"-y1"}), b1, 100, 1).passed);

    const Bracket b2{{RegulatedGrid::constant(0.0, n), RegulatedGrid::constant(0.0, n)},
                     {RegulatedGrid::constant(1.0, n), RegulatedGrid::constant(1.0, n)}};
    EXPECT_FALSE(check_quasimonotone(expr_field({"-y2", "y1"}), b2, 200, 1).passed);
    EXPECT_TRUE(check_quasimonotone(expr_field({"y2", "y1"}), b2, 200, 1).passed);
}

TEST(JumpMonotone, Examples)
{
    const Interval w{0.0, 1.0};
    const auto n = std::vector<double>{0.0, 0.5, 1.0};
    const VectorIntegrator vg({Integrator(w, AcPart::none(), {{0.5, 1.0}})});
    const Bracket b{{RegulatedGrid::constant(0.0, n)}, {RegulatedGrid::constant(4.0, n)}};
    EXPECT_FALSE(check_jump_monotone(expr_field({"-2*y1"}), vg, b, 50).passed);
    EXPECT_TRUE(check_jump_monotone(expr_field({"-0.5*y1"}), vg, b, 50).passed);
    const Bracket b0{{RegulatedGrid::constant(0.0, nodes01(4))}, {RegulatedGrid::constant(4.0, nodes01(4))}};
    EXPECT_TRUE(check_jump_monotone(expr_field({"-2*y1"}), id01, b0, 50).passed);

    // refill branch u + min(u, 20 - u)
    const VectorIntegrator vr({Integrator(w, AcPart::none(), {{0.5, 1.0}})});
    std::vector<Expr> reg{parse("0")};
    std::vector<std::optional<Expr>> jb{parse("min(y1, 20 - y1)")};
    const Field refill = Field::from_exprs(reg, jb, {});
    EXPECT_EQ(refill.eval_jump(0, 0.5, std::vector<double>{5.0}) + 5.0, 10.0);
    EXPECT_EQ(refill.eval_jump(0, 0.5, std::vector<double>{10.0}) + 10.0, 20.0);
    EXPECT_EQ(refill.eval_jump(0, 0.5, std::vector<double>{12.0}) + 12.0, 20.0);
    const Bracket br{{RegulatedGrid::constant(0.0, n)}, {RegulatedGrid::constant(20.0, n)}};
    EXPECT_TRUE(check_jump_monotone(refill, vr, br, 200).passed);
}

TEST(Domination, Examples)
{
    const auto n = nodes01(10);
    const Bracket b{{RegulatedGrid::constant(0.0, n)}, {RegulatedGrid::constant(1.0, n)}};
    const DominatingBound zero{{Integrand::from_function([](double) { return 0.0; })}};
    EXPECT_TRUE(check_domination(expr_field({"0"}), id01, b, zero).passed);
    EXPECT_FALSE(check_domination(expr_field({"1"}), id01, b, zero).passed);
    const DominatingBound one{{Integrand::from_function([](double) { return 1.0; })}};
    EXPECT_TRUE(check_domination(expr_field({"-y1"}), id01, b, one).passed);
}

TEST(Domination, BacteriaWater)
{
    BacteriaParams p;
    const auto prob = bacteria_build(p, LowerOption::zero, 280);
    const double m2 = std::max(p.c, 2.0 * p.L);
    // component 1 bound: r beta1 (N(beta2) + beta1) covers |r p (N(w) - p)| on the bracket
    const auto& b1 = prob.bracket.beta[0];
    const auto& b2 = prob.bracket.beta[1];
    auto m1 = [&](double t, Side s) {
        const double p1 = b1.eval(t, s);
        return p.r * p1 * (std::floor(b2.eval(t, s)) + p1);
    };
    const DominatingBound M{{Integrand::from_function([&](double t) { return std::max(m1(t, Side::value), m1(t, Side::post)); }),
                             Integrand::from_function([m2](double) { return m2; })}};
    const auto r = check_domination(prob.field, prob.vg, prob.bracket, M, 1e-8, 2);
    EXPECT_TRUE(r.passed) << r.worst_violation << " at " << r.t << " comp " << r.component;
}

TEST(Truncate, Clamp)
{
    const auto n = nodes01(10);
    const Bracket b{{RegulatedGrid::sample([](double t) { return t; }, n)},
                    {RegulatedGrid::sample([](double t) { return 1.0 + t; }, n)}};
    const Field f = expr_field({"y1*y1 + t"});
    const Field tf = truncate_field(f, b);
    const std::vector<double> inside{1.2};
    EXPECT_EQ(tf.eval(0, 0.5, inside), f.eval(0, 0.5, inside));
    EXPECT_EQ(tf.eval(0, 0.5, std::vector<double>{-3.0}), f.eval(0, 0.5, std::vector<double>{0.5}));
    EXPECT_EQ(tf.eval(0, 0.5, std::vector<double>{9.0}), f.eval(0, 0.5, std::vector<double>{1.5}));
}

TEST(Extremal, ZeroFieldOneIteration)
{
    const auto n = nodes01(10);
    const Bracket b{{RegulatedGrid::constant(0.0, n)}, {RegulatedGrid::constant(2.0, n)}};
    ExtremalOptions o;
    o.mesh = 10;
    const auto r = extremal_solve(expr_field({"0"}), id01, std::vector<double>{1.0}, b, w01, o);
    EXPECT_EQ(r.status, IterationStatus::converged);
    EXPECT_LE(r.iterations, 2u);
    for (double t : r.result.solution[0].nodes()) EXPECT_EQ(r.result.solution[0](t), 1.0);
}

TEST(Extremal, DecayBothDirections)
{
    const auto n = nodes01(1000);
    const Bracket b{{RegulatedGrid::constant(0.0, n)}, {RegulatedGrid::constant(1.0, n)}};
    ExtremalOptions o;
    o.tol = 1e-9;
    o.max_iter = 500;
    const auto g = extremal_solve(expr_field({"-y1"}), id01, std::vector<double>{1.0}, b, w01, o);
    o.direction = Direction::least;
    const auto l = extremal_solve(expr_field({"-y1"}), id01, std::vector<double>{1.0}, b, w01, o);
    for (double t : n) {
        EXPECT_NEAR(g.result.solution[0](t), std::exp(-t), 1e-6);
        EXPECT_NEAR(g.result.solution[0](t), l.result.solution[0](t), 2e-9);
    }
}

TEST(Extremal, NonUniqueCubeRoot)
{
    const auto n = nodes01(1000);
    const Bracket b{{RegulatedGrid::constant(0.0, n)}, {RegulatedGrid::sample([](double t) { return t * t * t; }, n)}};
    ExtremalOptions o;
    o.tol = 1e-9;
    o.max_iter = 500;
    const auto g = extremal_solve(expr_field({"3*y1^(2/3)"}), id01, std::vector<double>{0.0}, b, w01, o);
    o.direction = Direction::least;
    const auto l = extremal_solve(expr_field({"3*y1^(2/3)"}), id01, std::vector<double>{0.0}, b, w01, o);
    EXPECT_NEAR(g.result.solution[0](1.0), 1.0, 1e-6);
    EXPECT_EQ(l.result.solution[0](1.0), 0.0);
    EXPECT_LT(g.result.residual, 1e-5);
}

TEST(Extremal, MaxIterReported)
{
    const auto n = nodes01(100);
    const Bracket b{{RegulatedGrid::constant(0.0, n)}, {RegulatedGrid::constant(1.0, n)}};
    ExtremalOptions o;
    o.mesh = 100;
    o.tol = 1e-14;
    o.max_iter = 3;
    const auto r = extremal_solve(expr_field({"-y1"}), id01, std::vector<double>{1.0}, b, w01, o);
    EXPECT_EQ(r.status, IterationStatus::max_iter_exceeded);
    EXPECT_EQ(r.iterations, 3u);
}

TEST(Functional, DegenerateReducesToExtremal)
{
    const auto n = nodes01(100);
    const Bracket b{{RegulatedGrid::constant(0.0, n)}, {RegulatedGrid::constant(1.0, n)}};
    const Field f = expr_field({"-y1"});
    FunctionalOptions o;
    o.inner.mesh = 100;
    o.inner.tol = 1e-10;
    const auto r = functional_extremal([&](std::span<const RegulatedGrid>) { return f; }, id01,
                                       std::vector<double>{1.0}, b, w01, o);
    EXPECT_EQ(r.status, OuterStatus::converged);
    EXPECT_LE(r.outer_iterations, 2u);
    EXPECT_TRUE(r.h5.passed);
}

TEST(Functional, MeanCoupledFixedPoint)
{
    const auto n = nodes01(200);
    const Bracket b{{RegulatedGrid::constant(1.0, n)}, {RegulatedGrid::sample([](double t) { return 1.0 + t; }, n)}};
    const std::vector<Expr> reg{parse("c*m")};
    const std::vector<std::optional<Expr>> jb(1);
    const FunctionalField F = [&](std::span<const RegulatedGrid> g) {
        return Field::from_exprs(reg, jb, Env{{"c", 0.5}, {"m", grid_mean(g[0])}});
    };
    FunctionalOptions o;
    o.inner.mesh = 200;
    o.inner.tol = 1e-10;
    o.outer_tol = 1e-9;
    const auto r = functional_extremal(F, id01, std::vector<double>{1.0}, b, w01, o);
    EXPECT_EQ(r.status, OuterStatus::converged);
    // m = 1 + m/4  =>  m = 4/3, x = 1 + 2t/3
    for (double t : n) EXPECT_NEAR(r.inner.result.solution[0](t), 1.0 + 2.0 * t / 3.0, 1e-6);
}

TEST(GridMean, Trapezoid)
{
    EXPECT_NEAR(grid_mean(RegulatedGrid::continuous({0.0, 2.0}, {0.0, 2.0})), 1.0, 1e-15);
    EXPECT_NEAR(grid_trapezoid(RegulatedGrid::continuous({0.0, 2.0}, {0.0, 2.0}), 0.5, 1.0), 0.375, 1e-15);
}
