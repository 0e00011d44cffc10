#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include <confine/geometry.hpp>

#include "oracles.hpp"

using namespace confine;

namespace {
Point pt(double x, double y) {
    Point p(2);
    p << x, y;
    return p;
}

CoefficientProfile power_disk(double beta, double nu0 = 1.0) {
    CoefficientProfile p;
    p.domain = DomainSpec::ball(1.0);
    p.components.push_back(make_power_component(0, 1, beta, 0.0, 1.0, 1.0, nu0));
    return p;
}

CoefficientProfile exterior_profile(double beta, double beta_inf) {
    auto p = uniform_profile(DomainSpec::exterior(1.0), beta, 0.0);
    p.infinity = InfinityRecord{beta_inf, 1.0, 4.0, RhoGrowth::Power, 0.0};
    return p;
}

double max_rel_error_vs_sqrt(const DistanceField& F) {
    double worst = 0.0;
    for (int j = 0; j < F.ny; ++j)
        for (int i = 0; i < F.nx; ++i) {
            if (!F.inside[F.index(i, j)]) continue;
            const double delta = 1.0 - std::hypot(F.x(i), F.y(j));
            const double exact = 2.0 * std::sqrt(delta);
            worst = std::max(worst, std::abs(F.at(i, j) - exact) / exact);
        }
    return worst;
}
}  // namespace

TEST(AgmonDistance, WorkedValues) {
    // a = 1 near the circle, nu0 large enough that depth 0.3 is in the exact region
    EXPECT_NEAR(agmon_boundary_distance(uniform_profile(DomainSpec::ball(1.0), 0.0, 0.0, 1.0, 1.0, 1.0), pt(0.7, 0.0)),
                0.3, 1e-12);
    EXPECT_TRUE(std::isinf(agmon_boundary_distance(uniform_profile(DomainSpec::ball(1.0), 2.0, 0.0), pt(0.5, 0.0))));
    EXPECT_NEAR(agmon_boundary_distance(uniform_profile(DomainSpec::ball(1.0), 1.0, 0.0, 1.0, 1.0, 1.0), pt(0.75, 0.0)),
                1.0, 1e-12);
}

TEST(AgmonDistance, DepthMatchesQuadrature) {
    for (double beta : {0.0, 0.5, 1.0, 1.5, 1.9}) {
        const auto c = make_power_component(0, 1, beta, 0.0);
        const double t = 0.2;
        const double e = 1.0 - 0.5 * beta;
        const double ref = std::pow(t, e) / e;
        EXPECT_NEAR(agmon_depth(c, t), ref, 1e-8 * std::max(1.0, ref)) << beta;
        if (beta <= 1.0)
            EXPECT_NEAR(oracle::simpson_from_zero([&](double s) { return std::pow(s, -0.5 * beta); }, t), ref, 1e-8);
    }
}

TEST(AgmonDistance, BlendedDepthMatchesQuadrature) {
    const auto c = make_component(0, 1, 1.0, 0.0, 1.0, 1.0, 0.4);
    auto f = [&](double s) { return 1.0 / std::sqrt(c.a(s)); };
    EXPECT_NEAR(agmon_depth(c, 0.35), oracle::simpson_from_zero(f, 0.35), 1e-8);
}

TEST(AgmonDistance, MonotoneInDepth) {
    const auto p = uniform_profile(DomainSpec::ball(1.0), 1.2, 0.0, 1.0, 1.0, 0.5);
    double last = 0.0;
    for (double r = 0.99; r > 0.0; r -= 0.07) {
        const double v = agmon_boundary_distance(p, pt(r, 0.0));
        EXPECT_GE(v, last);
        last = v;
    }
}

TEST(ClassifyManifold, BoundedCases) {
    EXPECT_EQ(classify_manifold(uniform_profile(DomainSpec::ball(1.0), 2.0, 0.0)).metric_case, MetricCase::C1_Complete);
    const auto m = classify_manifold(uniform_profile(DomainSpec::ball(1.0), 1.0, 0.0, 1.0, 1.0, 0.5));
    EXPECT_EQ(m.metric_case, MetricCase::C2_IncompleteFiniteDiam);
    const auto c = make_component(0, 1, 1.0, 0.0, 1.0, 1.0, 0.5);
    const double ref = 2.0 * oracle::simpson_from_zero([&](double s) { return 1.0 / std::sqrt(c.a(s)); }, 1.0);
    EXPECT_NEAR(m.diam_estimate, ref, 1e-7);
    EXPECT_FALSE(m.per_component_complete.at(0));
    // one complete and one incomplete component
    auto pb = uniform_profile(DomainSpec::punctured_ball(1.0), 0.0, 0.0, 1.0, 1.0, 0.2);
    pb.components[1] = make_component(1, 1, 2.0, 0.0, 1.0, 1.0, 0.2);
    EXPECT_EQ(classify_manifold(pb).metric_case, MetricCase::C3_IncompleteInfiniteDiam);
}

TEST(ClassifyManifold, CompletenessFlipsAtTwo) {
    EXPECT_EQ(classify_manifold(uniform_profile(DomainSpec::ball(1.0), 1.99, 0.0)).metric_case,
              MetricCase::C2_IncompleteFiniteDiam);
    EXPECT_EQ(classify_manifold(uniform_profile(DomainSpec::ball(1.0), 2.0, 0.0)).metric_case, MetricCase::C1_Complete);
}

TEST(ClassifyManifold, ExteriorDomain) {
    EXPECT_EQ(classify_manifold(exterior_profile(1.0, 3.0)).metric_case, MetricCase::C2_IncompleteFiniteDiam);
    EXPECT_EQ(classify_manifold(exterior_profile(1.0, 2.0)).metric_case, MetricCase::C3_IncompleteInfiniteDiam);
    EXPECT_EQ(classify_manifold(exterior_profile(2.0, 2.0)).metric_case, MetricCase::C1_Complete);
    const auto m = classify_manifold(exterior_profile(1.0, 3.0));
    ASSERT_TRUE(m.infinity_complete.has_value());
    EXPECT_FALSE(*m.infinity_complete);
    EXPECT_TRUE(std::isfinite(m.diam_estimate));
}

TEST(AssumptionA, StockDomains) {
    EXPECT_TRUE(check_assumption_A(uniform_profile(DomainSpec::ball(1.0), 1.0, 0.0)).holds());
    EXPECT_TRUE(check_assumption_A(uniform_profile(DomainSpec::punctured_ball(1.0), 1.0, 0.0, 1.0, 1.0, 0.2)).holds());
    EXPECT_TRUE(check_assumption_A(exterior_profile(1.0, 3.0)).holds());
    const auto a = check_assumption_A(half_strip_profile());
    EXPECT_EQ(a.status, TriState::Fails);
    EXPECT_NE(a.witness.find("midline"), std::string::npos);
}

TEST(CurvatureConstant, DiskBoundary) {
    // Δδ = -1/(1-δ) on the unit disk, flat part 0: sup over δ <= 0.2 is 1/0.8
    const auto p = uniform_profile(DomainSpec::ball(1.0), 1.0, 0.0);
    EXPECT_NEAR(estimate_curvature_constant(p, 0, 0.2), 1.25, 1e-3);
    // straight lines of the half strip have zero curvature
    EXPECT_LT(estimate_curvature_constant(half_strip_profile(), 0, 0.2), 1e-3);
}

TEST(Eikonal, ConstantMetricToPoint) {
    const auto p = uniform_profile(DomainSpec::ball(1.0), 0.0, 0.0, 1.0, 1.0, 0.5);
    const double h = 1.0 / 64.0;
    const auto F = eikonal_solve(p, h, ToPoint{pt(0.0, 0.0)});
    double worst = 0.0;
    for (int j = 0; j < F.ny; ++j)
        for (int i = 0; i < F.nx; ++i)
            if (F.inside[F.index(i, j)]) worst = std::max(worst, std::abs(F.at(i, j) - std::hypot(F.x(i), F.y(j))));
    EXPECT_LT(worst, 5.0 * h * std::log(1.0 / h));
    // first-order upwind overestimates the Euclidean distance off the axes
    EXPECT_NEAR(F.at(F.nx - 2, (F.ny - 1) / 2), 1.0 - h, 1e-12);
}

TEST(Eikonal, SqrtDepthOnDisk) {
    const auto F = eikonal_solve(power_disk(1.0), 1.0 / 128.0, ToBoundary{});
    EXPECT_FALSE(F.divergent);
    EXPECT_LT(max_rel_error_vs_sqrt(F), 1e-2);
}

TEST(Eikonal, DiscreteLipschitz) {
    const auto p = power_disk(1.0);
    const double h = 1.0 / 64.0;
    const auto F = eikonal_solve(p, h, ToBoundary{});
    EXPECT_LE(max_lipschitz_ratio(F, p), 1.0 + 10.0 * h);
}

TEST(Eikonal, CompleteComponentIsDivergent) {
    const auto F = eikonal_solve(power_disk(2.0), 1.0 / 64.0, ToBoundary{});
    EXPECT_TRUE(F.divergent);
    EXPECT_GT(F.cutoff, 0.0);
}

TEST(Eikonal, Errors) {
    try {
        eikonal_solve(power_disk(1.0, 0.05), 1.0 / 64.0, ToBoundary{});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::GridTooCoarse);
    }
    EXPECT_THROW(eikonal_solve(half_strip_profile(), 1.0 / 64.0, ToBoundary{}), Error);
}

TEST(Eikonal, CsvExport) {
    const auto F = eikonal_solve(power_disk(1.0, 0.5), 1.0 / 32.0, ToBoundary{});
    std::ostringstream os;
    F.write_csv(os);
    const auto s = os.str();
    EXPECT_EQ(s.rfind("x,y,u\n", 0), 0u);
    EXPECT_GT(std::count(s.begin(), s.end(), '\n'), 100);
}
