#include "stieltjes/error.hpp"
#include "stieltjes/integrator.hpp"
#include "stieltjes/models.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace stieltjes;

namespace {
Integrator unit_jump(double at, Interval dom = {0.0, 1.0})
{
    return Integrator(dom, AcPart::none(), {{at, 1.0}});
}
} // namespace

TEST(Integrator, DeltaPlusG)
{
    EXPECT_EQ(unit_jump(0.5).jump_at(0.5), 1.0);
    EXPECT_EQ(unit_jump(0.5).jump_at(0.4), 0.0);
    const Integrator bg = bacteria_g(14.0);
    EXPECT_EQ(bg.jump_at(2.0), 1.0);
    EXPECT_EQ(bg.jump_at(3.0), 0.0);
    EXPECT_EQ(bg.jump_at(0.0), 0.0);
}

TEST(Integrator, LeftContinuous)
{
    const Integrator bg = bacteria_g(14.0);
    EXPECT_NEAR(bg(2.0), 2.0 / std::numbers::pi, 1e-15);
    EXPECT_NEAR(bg.eval(2.0).right_limit - bg(2.0), 1.0, 1e-15);
}

TEST(Integrator, GEval)
{
    const Integrator id({0.0, 1.0}, AcPart::identity());
    EXPECT_EQ(g_eval(id, 0.4).value, 0.4);
    EXPECT_EQ(g_eval(id, 0.4).right_limit, 0.4);
    const auto j = g_eval(unit_jump(0.5), 0.5);
    EXPECT_EQ(j.value, 0.0);
    EXPECT_EQ(j.right_limit, 1.0);
    const auto b = g_eval(bacteria_g(14.0), 2.0);
    EXPECT_NEAR(b.value, 2.0 / std::numbers::pi, 1e-15);
    EXPECT_NEAR(b.right_limit, 1.0 + 2.0 / std::numbers::pi, 1e-15);
    EXPECT_THROW(g_eval(id, 1.5), OutOfDomain);
}

TEST(Integrator, MeasureInterval)
{
    const Integrator id({0.0, 1.0}, AcPart::identity());
    EXPECT_NEAR(measure_interval(id, 0.2, 0.7), 0.5, 1e-15);
    EXPECT_EQ(measure_interval(unit_jump(0.5), 0.5, 0.6), 1.0);
    EXPECT_EQ(measure_interval(unit_jump(0.5), 0.4, 0.5), 0.0);
    EXPECT_NEAR(measure_interval(bacteria_g(14.0), 0.0, 3.0), 1.0 + 4.0 / std::numbers::pi, 1e-12);
    EXPECT_THROW(measure_interval(id, 0.7, 0.2), ReversedInterval);
}

TEST(Integrator, MergedEvents)
{
    const Interval d{0.0, 5.0};
    const VectorIntegrator a({Integrator(d, AcPart::identity()), unit_jump(2.0, d)});
    EXPECT_EQ(merged_events(a, 0.0, 5.0), (std::vector<double>{2.0}));
    const VectorIntegrator b({Integrator(d, AcPart::none(), {{1.0, 1.0}, {3.0, 1.0}}),
                              Integrator(d, AcPart::none(), {{3.0, 2.0}, {4.0, 1.0}})});
    EXPECT_EQ(merged_events(b, 0.0, 5.0), (std::vector<double>{1.0, 3.0, 4.0}));
    const Interval d7{0.0, 14.0};
    const VectorIntegrator bac({Integrator(d7, AcPart::identity()), bacteria_g(14.0)});
    EXPECT_EQ(merged_events(bac, 0.0, 7.0), (std::vector<double>{2.0, 4.0, 6.0}));
}

TEST(Integrator, DensityKindIntegratesItself)
{
    const Integrator g({0.0, 1.0}, AcPart::from_density([](double t) { return 2.0 * t; }));
    EXPECT_NEAR(g(1.0), 1.0, 1e-12);
    EXPECT_NEAR(g.continuous_increment(0.5, 1.0), 0.75, 1e-12);
}

TEST(Integrator, Validation)
{
    EXPECT_THROW(Integrator({0.0, 1.0}, AcPart::none(), {{0.5, -1.0}}), InvalidIntegrator);
    EXPECT_THROW(Integrator({0.0, 1.0}, AcPart::none(), {{0.6, 1.0}, {0.5, 1.0}}), InvalidIntegrator);
    EXPECT_THROW(Integrator({0.0, 1.0}, AcPart::from_primitive([](double t) { return -t; })), InvalidIntegrator);
}

TEST(Integrator, PeriodicJumps)
{
    const auto j = periodic_jumps(2.0, 2.0, 1.0, 14.0);
    ASSERT_EQ(j.size(), 7u);
    EXPECT_EQ(j.front().time, 2.0);
    EXPECT_EQ(j.back().time, 14.0);
}
