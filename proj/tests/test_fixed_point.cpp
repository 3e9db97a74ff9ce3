#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "relfix/fixed_point.hpp"
#include "relfix/fixtures.hpp"

namespace {

using namespace relfix;
using namespace relfix::fixtures;

// The four branches on [0,2], written out independently of the fixture.
double t24(double x) {
    if (x <= 2.0 / 3.0) return x / 3.0;
    if (x < 1.0) return 1.0 - x;
    if (x == 1.0) return 0.75;
    return x - 0.5;
}

TEST(CauchyBound, Values) {
    EXPECT_DOUBLE_EQ(cauchy_bound(0.5, 1.0, 3), 0.25);
    EXPECT_EQ(cauchy_bound(0.0, 7.0, 1), 0.0);
    EXPECT_NEAR(cauchy_bound(0.75, 1.5, 10), 1.5 * std::pow(0.75, 10) / 0.25, 1e-15);
    EXPECT_NEAR(cauchy_bound(0.75, 1.5, 10), 0.3379, 1e-4);
}

TEST(CauchyBound, Domain) {
    EXPECT_THROW((void)cauchy_bound(1.0, 1.0, 1), DomainError);
    EXPECT_THROW((void)cauchy_bound(-0.1, 1.0, 1), DomainError);
    EXPECT_THROW((void)cauchy_bound(0.5, -1.0, 1), DomainError);
}

TEST(Iterate, FourBranchOrbitFromTwo) {
    const auto o = iterate(ex24_map(), Point(2.0), ex24_space(), second_argument_w_distance(), 0.75);
    ASSERT_GE(o.points.size(), 7u);
    const std::vector<double> head{2, 1.5, 1, 0.75, 0.25, 1.0 / 12, 1.0 / 36};
    double x = 2.0;
    for (std::size_t i = 0; i < head.size(); ++i) {
        EXPECT_DOUBLE_EQ(o.points[i].scalar(), head[i]);
        EXPECT_EQ(o.points[i].scalar(), x);
        x = t24(x);
    }
    EXPECT_EQ(o.stop_reason, StopReason::Converged);
    EXPECT_LE(o.steps(), 60u);
    EXPECT_LE(std::abs(o.last().scalar()), 1e-9);
    EXPECT_EQ(o.bound.size(), o.points.size());
}

TEST(Iterate, FixedSeedStopsAfterOneStep) {
    const auto X = ex23_space();
    const auto o = iterate(ex23_map(), Point(2.0), X, abs_sum_w_distance(), 5.0 / 6.0);
    EXPECT_EQ(o.stop_reason, StopReason::Converged);
    EXPECT_EQ(o.steps(), 1u);
    EXPECT_EQ(o.d_gaps[0], 0.0);
    EXPECT_EQ(o.p_gaps[0], 4.0);
}

TEST(Iterate, IdentityResidualZero) {
    const auto X = MetricSpace::closed(0, 1);
    const auto o = iterate(identity_map(), Point(0.3), X, metric_w_distance(X), std::nullopt);
    EXPECT_EQ(o.steps(), 1u);
    EXPECT_TRUE(o.bound.empty());
}

TEST(Iterate, MaxIterWithoutConvergence) {
    const auto X = MetricSpace::closed(-10, 10);
    const SelfMap flip{"-x", [](const Point& x) { return Point(-x.scalar()); }};
    IterateOptions opt;
    opt.max_iter = 5;
    const auto o = iterate(flip, Point(1.0), X, metric_w_distance(X), std::nullopt, opt);
    EXPECT_EQ(o.stop_reason, StopReason::MaxIter);
    EXPECT_EQ(o.steps(), 5u);
}

TEST(Iterate, DivergenceCarriesTrace) {
    const auto X = MetricSpace::closed(0, 1);
    const SelfMap blow{"10x", [](const Point& x) { return Point(10.0 * x.scalar()); }};
    try {
        (void)iterate(blow, Point(1.0), X, metric_w_distance(X), std::nullopt);
        FAIL() << "expected divergence";
    } catch (const DivergenceError& e) {
        EXPECT_EQ(e.trace().stop_reason, StopReason::Diverged);
        EXPECT_GT(e.trace().d_gaps.back(), 1e8);
    }
    const SelfMap inf{"inf", [](const Point& x) { return Point(x.scalar() / 0.0); }};
    EXPECT_THROW((void)iterate(inf, Point(1.0), X, metric_w_distance(X), std::nullopt), DivergenceError);
}

TEST(Iterate, RejectsBadLambda) {
    const auto X = MetricSpace::closed(0, 1);
    EXPECT_THROW((void)iterate(identity_map(), Point(0.0), X, metric_w_distance(X), 1.0), DomainError);
}

TEST(CertifyCauchy, FourBranchOrbit) {
    const auto o = iterate(ex24_map(), Point(2.0), ex24_space(), second_argument_w_distance(), 0.75);
    const auto c = certify_cauchy(o, second_argument_w_distance());
    EXPECT_TRUE(c.holds);
    const std::size_t N = o.points.size();
    EXPECT_EQ(c.pairs_checked, N * (N - 1) / 2);
}

TEST(CertifyCauchy, ConstantOrbitAtZero) {
    OrbitTrace t;
    t.points.assign(5, Point(0.0));
    t.bound.assign(5, 0.0);
    EXPECT_TRUE(certify_cauchy(t, second_argument_w_distance()).holds);
}

TEST(CertifyCauchy, CorruptedTrace) {
    auto o = iterate(ex24_map(), Point(2.0), ex24_space(), second_argument_w_distance(), 0.75);
    o.points[10] = Point(o.points[10].scalar() + 1.0);
    const auto c = certify_cauchy(o, second_argument_w_distance());
    EXPECT_FALSE(c.holds);
    EXPECT_EQ(c.violations.front().m, 10u);
}

TEST(CertifyCauchy, NeedsBound) {
    const auto X = MetricSpace::closed(0, 1);
    IterateOptions opt;
    opt.max_iter = 3;
    const SelfMap half{"x/2", [](const Point& x) { return Point(0.5 * x.scalar()); }};
    const auto o = iterate(half, Point(1.0), X, metric_w_distance(X), std::nullopt, opt);
    EXPECT_THROW((void)certify_cauchy(o, metric_w_distance(X)), PreconditionError);
}

TEST(GapChaining, HalvingMap) {
    const auto X = MetricSpace::closed(0, 1);
    const SelfMap half{"x/2", [](const Point& x) { return Point(0.5 * x.scalar()); }};
    const auto o = iterate(half, Point(1.0), X, metric_w_distance(X), 0.5);
    EXPECT_TRUE(gap_chaining_violations(o, 0.5).empty());
    EXPECT_FALSE(gap_chaining_violations(o, 0.4).empty());
}

OrbitTrace long_orbit() {
    IterateOptions opt;
    opt.tol = 1e-300;
    opt.max_iter = 80;
    return iterate(ex24_map(), Point(2.0), ex24_space(), second_argument_w_distance(), 0.75, opt);
}

TEST(LimitUniqueness, FourBranchTail) {
    const auto o = long_orbit();
    EXPECT_TRUE(certify_limit_uniqueness(second_argument_w_distance(), o.points, Point(0.0), Point(0.0), o.bound,
                                         o.bound, ex24_space()));
}

TEST(LimitUniqueness, ExactValuesAsBounds) {
    const auto X = MetricSpace::closed(0, 10);
    const auto p = metric_w_distance(X);
    std::vector<Point> xs;
    std::vector<double> u;
    for (int n = 0; n < 40; ++n) {
        xs.emplace_back(3.0 + std::ldexp(1.0, -n));
        u.push_back(p(xs.back(), Point(3.0)));
    }
    EXPECT_TRUE(certify_limit_uniqueness(p, xs, Point(3.0), Point(3.0), u, u, X));
}

TEST(LimitUniqueness, DistinctLimitsViolateHypotheses) {
    const auto o = long_orbit();
    std::vector<double> tiny(o.points.size(), 1e-12);
    EXPECT_THROW((void)certify_limit_uniqueness(second_argument_w_distance(), o.points, Point(0.0), Point(0.5), o.bound,
                                                tiny, ex24_space()),
                 PreconditionError);
}

TEST(LimitUniqueness, BoundsMustVanish) {
    const std::vector<Point> xs{Point(1.0), Point(0.5)};
    const std::vector<double> u{1.0, 0.5};
    EXPECT_THROW((void)certify_limit_uniqueness(second_argument_w_distance(), xs, Point(0.0), Point(0.0), u, u,
                                                ex24_space()),
                 PreconditionError);
}

TEST(CertifyFixedPoint, ResidualGate) {
    const auto X = ex24_space();
    const auto p = second_argument_w_distance();
    const auto c = certify_fixed_point(ex24_map(), Point(0.0), X, p, 1e-12);
    ASSERT_TRUE(c.has_value());
    EXPECT_EQ(c->residual, 0.0);
    EXPECT_EQ(c->p_self, 0.0);
    EXPECT_FALSE(certify_fixed_point(ex24_map(), Point(1.0), X, p, 1e-3).has_value());
}

std::vector<Point> lattice(const MetricSpace& X, double step) {
    SampleSpec s;
    s.step = step;
    return sample_space(X, s);
}

TEST(ProbeUniqueness, FirstConditionWithZero) {
    const auto sample = lattice(ex24_space(), 0.01);
    const std::vector<Point> cands{Point(0.0)};
    const auto r = probe_uniqueness(product_relation(), ex24_map(), second_argument_w_distance(), ex24_space(), 0.75,
                                    cands, sample);
    EXPECT_EQ(r.verdict, Uniqueness::UniqueByCondition1);
    ASSERT_TRUE(r.z.has_value());
    EXPECT_EQ(*r.z, Point(0.0));
}

TEST(ProbeUniqueness, SecondConditionOnTotalOrder) {
    const auto sample = lattice(ex23_space(), 0.1);
    const std::vector<Point> cands{Point(2.0)};
    const auto r = probe_uniqueness(geq_relation(), ex23_map(), abs_sum_w_distance(), ex23_space(), 5.0 / 6.0, cands,
                                    sample);
    EXPECT_EQ(r.verdict, Uniqueness::UniqueByCondition2);
    EXPECT_TRUE(r.condition2_complete);
}

TEST(ProbeUniqueness, RejectsNonFixedCandidate) {
    const auto sample = lattice(ex24_space(), 0.1);
    const std::vector<Point> cands{Point(1.0)};
    EXPECT_THROW((void)probe_uniqueness(product_relation(), ex24_map(), second_argument_w_distance(), ex24_space(),
                                        0.75, cands, sample),
                 PreconditionError);
}

TEST(ProbeUniqueness, FailsWithoutRelationLinks) {
    const auto X = MetricSpace::closed(0, 1);
    const std::vector<Point> sample{Point(0.0)};
    const std::vector<Point> cands{Point(0.0)};
    const auto r = probe_uniqueness(empty_relation(), identity_map(), metric_w_distance(X), X, 0.5, cands, sample);
    EXPECT_EQ(r.verdict, Uniqueness::ProbeFailed);
}

TEST(OrbitCsv, LayoutAndLastRow) {
    const auto o = iterate(ex24_map(), Point(2.0), ex24_space(), second_argument_w_distance(), 0.75);
    std::ostringstream os;
    write_orbit_csv(os, o);
    std::istringstream in(os.str());
    std::string line, last;
    std::getline(in, line);
    EXPECT_EQ(line, "n,point,d_gap,p_gap,bound");
    std::getline(in, line);
    EXPECT_EQ(line, "0,2,0.5,1.5,6");
    std::size_t rows = 1;
    while (std::getline(in, line)) {
        last = line;
        ++rows;
    }
    EXPECT_EQ(rows, o.points.size());
    std::vector<std::string> fields;
    std::istringstream row(last);
    for (std::string f; std::getline(row, f, ',');) fields.push_back(f);
    ASSERT_EQ(fields.size(), 5u);
    EXPECT_TRUE(fields[2].empty());
    EXPECT_TRUE(fields[3].empty());
    EXPECT_FALSE(fields[4].empty());
}

}  // namespace
