#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include <confine/quadform.hpp>

#include "oracles.hpp"

using namespace confine;

namespace {
using C = CutoffSpec;
using W = AgmonWeight;

const Psi kOne{[](double) { return 1.0; }, [](double) { return 0.0; }, [](double) { return 0.0; }};
const Psi kExp{[](double t) { return std::exp(-t); }, [](double t) { return -std::exp(-t); },
               [](double t) { return std::exp(-t); }};

CoefficientProfile disk(double beta, double gamma) { return uniform_profile(DomainSpec::ball(1.0), beta, gamma); }

CoefficientProfile flat(double beta, double gamma) {
    CoefficientProfile p;
    p.domain = DomainSpec::interval(1.0);
    p.components.push_back(make_power_component(0, 0, beta, gamma, 1.0, 1.0, 0.5));
    return p;
}

struct LocalizationCase {
    const char* name;
    W weight;
    std::vector<C> cutoffs;
};

// breakpoints of every cutoff sit on grid nodes: nu = 2^-3, and delta_M = 2 sqrt(t) = 1 at t = 2^-2
std::vector<LocalizationCase> localization_matrix() {
    return {
        {"annular/zero", W::zero(), {C::annular_k(0.2, 0.4)}},
        {"ball/zero", W::zero(), {C::ball_l(1.0, 1.6)}},
        {"log/zero", W::zero(), {C::log_ramp(0.125)}},
        {"annular/sigma", W::sigma_g(SigmaSpec::pure_log(1.0)), {C::annular_k(0.2, 0.4)}},
        {"ball/linear", W::linear_dm(1.5), {C::ball_l(1.0, 1.6)}},
        {"log/gjlog", W::gj_log(1.0, 0.05), {C::log_ramp(0.125)}},
    };
}
}  // namespace

TEST(Grid, GradedNodes) {
    const auto g = graded_grid(0.5, 4, 8);
    EXPECT_EQ(g.size(), 33u);
    EXPECT_DOUBLE_EQ(g.nodes.back(), 0.5);
    EXPECT_DOUBLE_EQ(g.t_min(), 0.5 / 16.0);
    for (std::size_t i = 1; i < g.size(); ++i) EXPECT_NEAR(g.nodes[i] / g.nodes[i - 1], std::exp2(1.0 / 8), 1e-14);
    EXPECT_THROW(graded_grid(1.0, 4, 4), Error);
}

TEST(AssembleForm, HatFunctionEnergy) {
    const auto sl = power_problem(0.0, 0.0);
    const auto g = graded_grid(1.0, 6, 8);
    const auto q = assemble_form(sl, g);
    for (std::size_t i : {5u, 20u, 40u}) {
        std::vector<double> u(g.size(), 0.0);
        u[i] = 1.0;
        const double left = g.nodes[i] - g.nodes[i - 1], right = g.nodes[i + 1] - g.nodes[i];
        // 2/h on a uniform stencil
        EXPECT_NEAR(q.energy(u, u), 1.0 / left + 1.0 / right, 1e-9 * (1.0 / left));
    }
}

TEST(AssembleForm, PotentialSymmetryPositivity) {
    const auto sl = power_problem(1.0, 0.0);
    const auto g = graded_grid(1.0, 10, 8);
    const auto q = assemble_form(sl, g, [](double) { return 1.0; });
    std::mt19937_64 rng(3);
    for (int k = 0; k < 50; ++k) {
        const auto u = random_test_function(g, rng), v = random_test_function(g, rng);
        EXPECT_NEAR(q(u, v), q(v, u), 1e-12 * (1.0 + std::abs(q(u, v))));
        EXPECT_GE(q(u, u), 0.0);
        EXPECT_NEAR(q(u, u), q.energy(u, u) + q.inner(u, u), 1e-12 * q(u, u));
    }
}

TEST(AssembleForm, MatchesQuadratureUnderRefinement) {
    // a = t, w = 1: energy of a smooth bump supported inside the collar
    const auto sl = power_problem(1.0, 0.0);
    auto bump = [](double t) { return t > 0.05 && t < 0.5 ? std::pow(std::sin(M_PI * (t - 0.05) / 0.45), 2) : 0.0; };
    auto dbump = [](double t) {
        if (!(t > 0.05 && t < 0.5)) return 0.0;
        const double x = M_PI * (t - 0.05) / 0.45;
        return 2.0 * std::sin(x) * std::cos(x) * M_PI / 0.45;
    };
    const double ref = oracle::simpson([&](double t) { return t * dbump(t) * dbump(t); }, 0.05, 0.5);
    double last_err = kInf;
    for (int n : {32, 64, 128, 256}) {
        const auto g = graded_grid(1.0, 8, n);
        std::vector<double> u(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) u[i] = bump(g.nodes[i]);
        const double err = std::abs(assemble_form(sl, g).energy(u, u) - ref) / ref;
        EXPECT_LT(err, last_err);
        last_err = err;
    }
    EXPECT_LT(last_err, 1e-4);
}

TEST(AssembleForm, CoarseGrid) {
    auto g = graded_grid(1.0, 4, 8);
    g.per_level = 4;
    try {
        assemble_form(power_problem(1.0, 0.0), g);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::GridTooCoarse);
    }
}

TEST(ManufacturedSolution, Examples) {
    const auto V1 = manufactured_solution(power_problem(1.5, 0.3), kOne, -2.0);
    for (double t : {0.01, 0.3, 0.9}) EXPECT_NEAR(V1(t), -2.0, 1e-12);
    const auto V2 = manufactured_solution(power_problem(0.0, 0.0), kExp, -1.0);
    for (double t : {0.01, 0.3, 0.9}) EXPECT_NEAR(V2(t), 0.0, 1e-12);  // E + 1
    // a = t, psi = t: (t * 1)' / t = 1 / t
    const Psi lin{[](double t) { return t; }, [](double) { return 1.0; }, [](double) { return 0.0; }};
    const auto V3 = manufactured_solution(power_problem(1.0, 0.0), lin, -1.0);
    for (double t : {0.01, 0.3, 0.9}) EXPECT_NEAR(V3(t), -1.0 + 1.0 / t, 1e-8 / t);
    const Psi bad{[](double t) { return t - 0.5; }, [](double) { return 1.0; }, [](double) { return 0.0; }};
    try {
        manufactured_solution(power_problem(1.0, 0.0), bad, -1.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NonPositivePsi);
    }
}

TEST(Localization, SecondOrderOnTestMatrix) {
    const auto sl = power_problem(1.0, 0.0);
    for (const auto& c : localization_matrix()) {
        const auto rows = localization_refinement(sl, 16, {16, 32, 64, 128}, kExp, -1.0, c.weight, c.cutoffs);
        EXPECT_GE(fitted_order(rows), 1.5) << c.name;
        EXPECT_LT(rows.back().residual, 1e-3) << c.name;
    }
}

TEST(Localization, CsvExport) {
    const auto sl = power_problem(1.0, 0.0);
    const auto rows = localization_refinement(sl, 12, {8, 16}, kOne, -1.0, W::zero(), {C::annular_k(0.2, 0.4)});
    std::ostringstream os;
    write_refinement_csv(os, rows);
    const auto s = os.str();
    EXPECT_EQ(s.rfind("h,residual,fitted_order\n", 0), 0u);
    EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 3);
}

TEST(BasicInequality, TrivialWeight) {
    const auto r = basic_inequality_check(power_problem(1.0, 0.0), graded_grid(1.0, 24, 16), kOne, -1.0, 1.0,
                                          [](double) { return 0.0; }, W::zero(), {C::annular_k(0.2, 0.4)});
    EXPECT_TRUE(r.holds());
}

TEST(BasicInequality, IncompleteManifoldConstruction) {
    // g = G(delta_M) with G = ln, phi_j = k_j(delta_M) l_j(d_M), B = |grad_M g|^2 = 1/delta_M^2 = 1/(4t)
    const auto sl = power_problem(1.0, 0.0);
    const auto grid = graded_grid(1.0, 24, 16);
    for (int j = 1; j <= 8; ++j) {
        const double rj = std::ldexp(1.0, 1 - j);
        for (const auto& psi : {kOne, kExp}) {
            const auto r = basic_inequality_check(sl, grid, psi, -1.0, 0.0, [](double t) { return 0.25 / t; },
                                                  W::sigma_g(SigmaSpec::pure_log(1.0)),
                                                  {C::annular_k(0.5 * rj, rj), C::ball_l(2.0 + j, 3.0 + j)});
            EXPECT_TRUE(r.holds()) << j << ": " << r.lhs << " > " << r.rhs;
        }
    }
}

TEST(BasicInequality, LinearMetricWeightConstruction) {
    const auto sl = power_problem(1.0, 0.0);
    const auto grid = graded_grid(1.0, 24, 16);
    for (double alpha : {0.5, 1.0, 2.0}) {
        const auto r = basic_inequality_check(sl, grid, kOne, -0.5 * alpha * alpha, 0.0, [](double) { return 0.0; },
                                              W::linear_dm(alpha), {C::ball_l(0.5, 1.2)});
        EXPECT_TRUE(r.holds()) << alpha;
    }
}

TEST(BasicInequality, PreconditionReported) {
    try {
        basic_inequality_check(power_problem(1.0, 0.0), graded_grid(1.0, 24, 16), kOne, -1.0, 0.0,
                               [](double) { return 0.0; }, W::sigma_g(SigmaSpec::pure_log(1.0)),
                               {C::annular_k(0.2, 0.4)});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::PreconditionViolated);
        EXPECT_NE(std::string(e.what()).find("at t ="), std::string::npos);
    }
}

TEST(Hardy, ConstantsAndBarrier) {
    const auto k = hardy_constants(disk(0.0, 3.0), 0);
    EXPECT_DOUBLE_EQ(k.kappa, 2.0);
    EXPECT_DOUBLE_EQ(k.coefficient, 1.0);
    const double t = 1e-3;
    EXPECT_NEAR(hardy_barrier(disk(0.0, 3.0), 0, t, k), std::pow(t, -2.0) * (1.0 - k.C2 * t), 1e-9);
    EXPECT_LT(k.C2 * t, 1e-2);
    const auto k2 = hardy_constants(disk(1.5, 0.0), 0);
    EXPECT_DOUBLE_EQ(k2.coefficient, 1.0 / 16.0);
    // wiring: coefficient = (kappa/2)^2 D_- rho_- / rho_+
    for (const auto& kk : {k, k2}) EXPECT_NEAR(kk.coefficient, std::pow(0.5 * kk.kappa, 2), 1e-15);
    // flat boundary: no curvature correction
    EXPECT_LT(hardy_constants(flat(0.0, 3.0), 0).C2, 1e-6);
    EXPECT_THROW(hardy_constants(disk(0.0, 1.0), 0), Error);
}

TEST(Hardy, VectorFieldBoundFlatModel) {
    const auto p = flat(0.0, 3.0);
    const double t = 0.01;
    // ((beta+gamma+d-d_j-2)/2)^2 rho D t^{beta+gamma-2}
    EXPECT_NEAR(vector_field_bound(p, 0, t), std::pow(t, 1.0), 1e-14);
    EXPECT_LT(vector_field_bound(p, 0, t, 1.1), vector_field_bound(p, 0, t));
    EXPECT_LT(vector_field_bound(p, 0, t, 0.9), vector_field_bound(p, 0, t));
    // divergence cross-checked by finite differences of X = h t^{beta+gamma-1}
    const double h = 1.0, e = 1e-6;
    auto X = [&](double s) { return h * std::pow(s, 2.0); };
    const double fd = (X(t + e) - X(t - e)) / (2 * e) - X(t) * X(t) / std::pow(t, 3.0);
    EXPECT_NEAR(vector_field_bound(p, 0, t), fd, 1e-8);
}

TEST(Hardy, InequalitySlack) {
    for (const auto& [beta, gamma] : {std::pair{0.0, 3.0}, std::pair{1.5, 0.0}, std::pair{1.9, -0.8}}) {
        const auto p = disk(beta, gamma);
        const auto grid = graded_grid(0.9 * 0.25, 30, 8);
        const auto r = hardy_inequality_check(p, 0, grid, 500);
        EXPECT_EQ(r.samples, 500);
        EXPECT_GE(r.min_slack, -1e-8) << beta << " " << gamma;
    }
}

TEST(Hardy, SeedReproducible) {
    const auto p = disk(0.0, 3.0);
    const auto grid = graded_grid(0.2, 20, 8);
    const auto a = hardy_inequality_check(p, 0, grid, 50, 42), b = hardy_inequality_check(p, 0, grid, 50, 42);
    EXPECT_EQ(a.min_slack, b.min_slack);
}
