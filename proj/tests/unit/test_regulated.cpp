#include "stieltjes/error.hpp"
#include "stieltjes/regulated.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace stieltjes;

namespace {
RegulatedGrid unit_step(double at, double a = 0.0, double b = 1.0)
{
    return RegulatedGrid::from_jumps({a, at, b}, {0.0, 0.0, 1.0}, {0.0, 1.0, 0.0});
}
RegulatedGrid identity_grid(double a, double b)
{
    return RegulatedGrid::continuous({a, b}, {a, b});
}
} // namespace

TEST(Regulated, LeftContinuousValueAndRightLimit)
{
    const auto s = unit_step(0.5);
    EXPECT_EQ(s(0.5), 0.0);
    EXPECT_EQ(s.right_limit(0.5), 1.0);
    EXPECT_EQ(s.left_limit(0.5), 0.0);
    EXPECT_EQ(s(0.75), 1.0);
    EXPECT_EQ(s(0.25), 0.0);
    EXPECT_THROW(s(1.5), OutOfDomain);
}

TEST(Regulated, DeltaPlus)
{
    EXPECT_EQ(delta_plus(unit_step(0.5), 0.5), 1.0);
    const auto c = RegulatedGrid::constant(3.0, {0.0, 0.5, 1.0});
    for (double t : {0.0, 0.3, 0.5, 1.0}) EXPECT_EQ(delta_plus(c, t), 0.0);
}

TEST(Regulated, DeltaMinusVanishes)
{
    EXPECT_EQ(delta_minus(identity_grid(0.0, 1.0), 0.3), 0.0);
    const auto s = unit_step(0.5);
    for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) EXPECT_EQ(delta_minus(s, t), 0.0);
}

TEST(Regulated, EpsDivision)
{
    const auto id = identity_grid(0.0, 1.0);
    const auto d = eps_division(id, 0.25);
    ASSERT_GE(d.size(), 5u);
    EXPECT_EQ(d.front(), 0.0);
    EXPECT_EQ(d.back(), 1.0);
    for (std::size_t k = 0; k + 1 < d.size(); ++k) {
        EXPECT_LT(d[k + 1] - d[k], 0.25);
        EXPECT_LT(sample_oscillation(id, d[k], d[k + 1]), 0.25);
    }

    const auto ds = eps_division(unit_step(0.5), 0.1);
    EXPECT_NE(std::find(ds.begin(), ds.end(), 0.5), ds.end());

    const auto dc = eps_division(RegulatedGrid::constant(2.0, {0.0, 1.0}), 1e-6);
    EXPECT_EQ(dc, (std::vector<double>{0.0, 1.0}));
}

TEST(Regulated, PointwiseSupStaircase)
{
    const auto a = unit_step(0.3);
    const auto b = RegulatedGrid::from_jumps({0.0, 0.6, 1.0}, {0.0, 0.0, 2.0}, {0.0, 2.0, 0.0});
    const std::vector<RegulatedGrid> gs{a, b};
    const auto s = pointwise_sup(gs);
    EXPECT_EQ(s(0.2), 0.0);
    EXPECT_EQ(s(0.3), 0.0);
    EXPECT_EQ(s.right_limit(0.3), 1.0);
    EXPECT_EQ(s(0.6), 1.0);
    EXPECT_EQ(s.right_limit(0.6), 2.0);
    EXPECT_EQ(s(0.9), 2.0);
}

TEST(Regulated, SupOfZeroAndIdentity)
{
    const std::vector<RegulatedGrid> gs{RegulatedGrid::constant(0.0, {-1.0, 1.0}), identity_grid(-1.0, 1.0)};
    const auto s = pointwise_sup(gs);
    for (double t : {-1.0, -0.5, -0.1, 0.0}) EXPECT_EQ(s(t), 0.0);
    for (double t : {0.1, 0.5, 1.0}) EXPECT_NEAR(s(t), t, 1e-15);
    const auto i = pointwise_inf(gs);
    EXPECT_NEAR(i(-0.5), -0.5, 1e-15);
    EXPECT_EQ(i(0.5), 0.0);
}

TEST(Regulated, SupOfOneGridIsThatGrid)
{
    const auto a = unit_step(0.4);
    const std::vector<RegulatedGrid> gs{a};
    EXPECT_TRUE(approx_equal(pointwise_sup(gs), a));
}

TEST(Regulated, SupDomainMismatch)
{
    const std::vector<RegulatedGrid> gs{unit_step(0.5), unit_step(0.5, 0.0, 2.0)};
    EXPECT_THROW(pointwise_sup(gs), DomainMismatch);
}

TEST(Regulated, InvalidGridRejected)
{
    EXPECT_THROW(RegulatedGrid::continuous({0.0, 0.0}, {1.0, 1.0}), InvalidGrid);
    EXPECT_THROW(RegulatedGrid::continuous({0.0, 1.0}, {1.0}), InvalidGrid);
}

TEST(Regulated, CsvRoundTrip)
{
    const auto s = RegulatedGrid::from_jumps({0.0, 0.1, 1.0 / 3.0, 1.0}, {0.1, 0.2, 1.0 / 7.0, 2.5},
                                             {0.0, 0.3, -1e-17, 0.0});
    std::stringstream ss;
    write_csv(ss, s);
    EXPECT_EQ(ss.str().rfind("t,value,post\n", 0), 0u);
    const auto r = read_csv(ss);
    ASSERT_EQ(r.size(), s.size());
    for (std::size_t j = 0; j < s.size(); ++j) {
        EXPECT_EQ(r.nodes()[j], s.nodes()[j]);
        EXPECT_EQ(r.values()[j], s.values()[j]);
        EXPECT_EQ(r.posts()[j], s.posts()[j]);
    }
}

TEST(Regulated, FormatNumberRoundTrips)
{
    for (double x : {0.1, 1.0 / 3.0, 1e-300, 9.45e102, -2.5, 0.0, 123456789.125}) {
        EXPECT_EQ(std::stod(format_number(x)), x);
    }
    EXPECT_EQ(format_number(0.1), "0.1");
}
