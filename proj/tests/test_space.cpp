#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "relfix/format.hpp"
#include "relfix/space.hpp"

namespace {

using relfix::Grid;
using relfix::MetricSpace;
using relfix::Point;
using relfix::SampleSpec;

std::vector<double> scalars_of(const std::vector<Point>& xs) {
    std::vector<double> out;
    for (const auto& x : xs) out.push_back(x.scalar());
    return out;
}

TEST(Grid, NodesAreUniform) {
    const Grid g(4);
    EXPECT_EQ(g.node_count(), 5u);
    EXPECT_DOUBLE_EQ(g.step(), 0.25);
    EXPECT_EQ(g.node(0), 0.0);
    EXPECT_EQ(g.node(4), 1.0);
    const auto ns = g.nodes();
    for (std::size_t i = 1; i < ns.size(); ++i) EXPECT_LT(ns[i - 1], ns[i]);
}

TEST(Grid, RejectsZeroIntervals) { EXPECT_THROW(Grid(0), relfix::DomainError); }

TEST(Point, RejectsNonFinite) {
    EXPECT_THROW(Point(std::nan("")), relfix::DomainError);
    EXPECT_THROW(Point::on_grid(Grid(2), {0.0, INFINITY, 1.0}), relfix::DomainError);
}

TEST(Point, RejectsWrongLength) { EXPECT_THROW(Point::on_grid(Grid(4), {0.0, 1.0}), relfix::ShapeError); }

TEST(Point, KindAccessorsThrowOnMismatch) {
    const Point s = 1.5;
    EXPECT_THROW((void)s.grid_fn(), relfix::ShapeError);
    EXPECT_THROW((void)Point::constant(Grid(2), 0.0).scalar(), relfix::ShapeError);
}

TEST(MetricEval, IntervalDistance) {
    const auto X = MetricSpace::half_open(1.0, 3.0);
    EXPECT_EQ(relfix::metric_eval(X, Point(2.0), Point(1.0)), 1.0);
}

TEST(MetricEval, ZeroFunctionsAtZeroDistance) {
    const auto F = MetricSpace::functions(8);
    const auto z = Point::constant(Grid(8), 0.0);
    EXPECT_EQ(relfix::metric_eval(F, z, z), 0.0);
}

TEST(MetricEval, IdentityAgainstSquareOnFiveNodes) {
    const Grid g(4);
    const auto F = MetricSpace::functions(4);
    const auto x = Point::sample_fn(g, [](double t) { return t; });
    const auto y = Point::sample_fn(g, [](double t) { return t * t; });
    // Nodes 0, 1/4, 1/2, 3/4, 1: |t - t^2| = 0, 3/16, 1/4, 3/16, 0.
    double oracle = 0.0;
    for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) oracle = std::max(oracle, std::abs(t - t * t));
    EXPECT_EQ(oracle, 0.25);
    EXPECT_EQ(relfix::metric_eval(F, x, y), oracle);
}

TEST(MetricEval, MismatchedKindsOrGrids) {
    const auto F = MetricSpace::functions(4);
    EXPECT_THROW((void)relfix::metric_eval(F, Point(1.0), Point::constant(Grid(4), 0.0)), relfix::ShapeError);
    EXPECT_THROW((void)relfix::metric_eval(F, Point::constant(Grid(4), 0.0), Point::constant(Grid(8), 0.0)),
                 relfix::ShapeError);
    EXPECT_THROW((void)relfix::metric_eval(MetricSpace::closed(0, 1), Point::constant(Grid(4), 0.0), Point(0.0)),
                 relfix::ShapeError);
}

TEST(Interval, HalfOpenMembershipIsExact) {
    const auto X = MetricSpace::half_open(1.0, 3.0);
    EXPECT_TRUE(X.contains(Point(1.0)));
    EXPECT_TRUE(X.contains(Point(std::nextafter(3.0, 0.0))));
    EXPECT_FALSE(X.contains(Point(3.0)));
    EXPECT_FALSE(X.contains(Point(std::nextafter(1.0, 0.0))));
    EXPECT_TRUE(MetricSpace::closed(0.0, 2.0).contains(Point(2.0)));
}

TEST(SampleSpace, HalfOpenLatticeDropsEndpoint) {
    SampleSpec s;
    s.step = 0.5;
    EXPECT_EQ(scalars_of(relfix::sample_space(MetricSpace::half_open(1.0, 3.0), s)),
              (std::vector<double>{1.0, 1.5, 2.0, 2.5}));
}

TEST(SampleSpace, ClosedLatticeKeepsEndpoint) {
    SampleSpec s;
    s.step = 1.0;
    EXPECT_EQ(scalars_of(relfix::sample_space(MetricSpace::closed(0.0, 2.0), s)), (std::vector<double>{0, 1, 2}));
}

TEST(SampleSpace, FineLatticeReachesRightEndpoint) {
    SampleSpec s;
    s.step = 0.01;
    const auto xs = relfix::sample_space(MetricSpace::closed(0.0, 2.0), s);
    ASSERT_EQ(xs.size(), 201u);
    EXPECT_EQ(xs.back().scalar(), 2.0);
}

TEST(SampleSpace, Errors) {
    SampleSpec s;
    s.step = 0.0;
    EXPECT_THROW(relfix::sample_space(MetricSpace::closed(0, 1), s), relfix::SamplingError);
    SampleSpec c;
    c.count = 0;
    EXPECT_THROW(relfix::sample_space(MetricSpace::functions(4), c), relfix::SamplingError);
}

TEST(SampleSpace, FunctionSampleEndsWithZero) {
    SampleSpec s;
    s.count = 3;
    s.seed = 7;
    const auto xs = relfix::sample_space(MetricSpace::functions(4), s);
    ASSERT_EQ(xs.size(), 4u);
    EXPECT_EQ(xs.back(), Point::constant(Grid(4), 0.0));
    for (std::size_t i = 0; i < 3; ++i)
        for (double v : xs[i].values()) {
            EXPECT_GE(v, 0.0);
            EXPECT_LT(v, 2.0);
        }
}

// Independent redraw: mt19937_64, top 53 bits, scaled to the box.
TEST(SampleSpace, FunctionSampleMatchesDirectDraw) {
    SampleSpec s;
    s.count = 5;
    s.seed = 11;
    s.box_lo = -1.0;
    s.box_hi = 3.0;
    const auto xs = relfix::sample_space(MetricSpace::functions(6), s);
    std::mt19937_64 rng(11);
    for (std::size_t c = 0; c < 5; ++c)
        for (double v : xs[c].values()) {
            const double u = std::ldexp(static_cast<double>(rng() >> 11), -53);
            EXPECT_EQ(v, -1.0 + 4.0 * u);
        }
}

TEST(SampleSpace, SeedSevenGolden) {
    SampleSpec s;
    s.count = 3;
    s.seed = 7;
    const auto xs = relfix::sample_space(MetricSpace::functions(4), s);
    std::ifstream in(std::string(RELFIX_SOURCE_DIR) + "/tests/golden/sample_n4_count3_seed7.txt");
    ASSERT_TRUE(in) << "golden file missing";
    for (const auto& x : xs) {
        std::string line;
        ASSERT_TRUE(std::getline(in, line));
        std::istringstream row(line);
        for (double v : x.values()) {
            std::string tok;
            ASSERT_TRUE(row >> tok);
            EXPECT_EQ(relfix::format_double(v), tok);
        }
    }
}

TEST(SampleSpace, Pure) {
    SampleSpec s;
    s.count = 8;
    s.seed = 3;
    EXPECT_EQ(relfix::sample_space(MetricSpace::functions(16), s), relfix::sample_space(MetricSpace::functions(16), s));
}

}  // namespace
