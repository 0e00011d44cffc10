#include <cmath>

#include <gtest/gtest.h>

#include <confine/criteria.hpp>

#include "oracles.hpp"

using namespace confine;

namespace {
CoefficientProfile disk(double beta, double gamma, double D = 1.0, double rho = 1.0) {
    return uniform_profile(DomainSpec::ball(1.0), beta, gamma, D, rho);
}

CoefficientProfile exterior(double beta, double beta_inf, RhoGrowth growth = RhoGrowth::Power, double kappa = 0.0) {
    auto p = uniform_profile(DomainSpec::exterior(1.0), beta, 0.0);
    p.infinity = InfinityRecord{beta_inf, 1.0, 4.0, growth, kappa};
    return p;
}

double depth_in_disk(const Point& x) { return 1.0 - x.norm(); }

// omega = delta^s on the unit disk, rho_tilde = rho / omega
WeightSplit power_split(const CoefficientProfile& p, double s) {
    WeightSplit w;
    w.omega = [s](const Point& x) { return std::pow(depth_in_disk(x), s); };
    w.rho_tilde = [s, p](const Point& x) { return evaluate_weight(p, x) / std::pow(depth_in_disk(x), s); };
    return w;
}

bool all_flags_true(const Verdict& v) {
    for (const auto& [k, c] : v.details)
        if (!c.ok) return false;
    return true;
}

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::InvalidArgument;
}
}  // namespace

TEST(DecimalRational, ExactDecimals) {
    EXPECT_EQ(decimal_rational(0.1), Rational(1, 10));
    EXPECT_EQ(decimal_rational(1.5), Rational(3, 2));
    EXPECT_EQ(decimal_rational(-0.25), Rational(-1, 4));
    EXPECT_EQ(decimal_rational(3.0), Rational(3));
}

TEST(ClassifyEsa, WorkedExamples) {
    const auto v = classify_esa(disk(1.5, 0.0));
    EXPECT_EQ(v.outcome, Outcome::Proven);
    EXPECT_EQ(v.theorem, "collar_esa");
    EXPECT_DOUBLE_EQ(v.details.at("c0:hardy_ratio>=1").lhs, 1.0);
    const auto n = classify_esa(disk(0.0, 0.0));
    EXPECT_EQ(n.outcome, Outcome::NotProven);
    EXPECT_DOUBLE_EQ(n.details.at("c0:hardy_ratio>=1").lhs, 0.25);
    EXPECT_EQ(classify_esa(disk(0.0, 3.0)).outcome, Outcome::Proven);
    EXPECT_EQ(classify_esa(disk(2.0, -7.0)).outcome, Outcome::Proven);
}

TEST(ClassifyEsa, GridMatchesRule) {
    for (int i = 0; i <= 12; ++i)
        for (int k = -4; k <= 8; ++k) {
            const double beta = 0.25 * i, gamma = 0.5 * k;
            const auto v = classify_esa(disk(beta, gamma));
            EXPECT_EQ(v.proven(), oracle::collar_esa_rule(beta, gamma, 1)) << beta << " " << gamma;
            if (v.proven()) EXPECT_TRUE(all_flags_true(v));
        }
}

TEST(ClassifyEsa, GammaSetsAtBetaZero) {
    for (double g : {-2.0, -1.0, 3.0, 3.5, 4.0}) EXPECT_EQ(classify_esa(disk(0.0, g)).outcome, Outcome::Proven) << g;
    for (double g : {0.0, 0.5, 1.0, 1.5, 2.0, 2.5}) EXPECT_EQ(classify_esa(disk(0.0, g)).outcome, Outcome::NotProven) << g;
}

TEST(ClassifyEsa, MonotoneInGammaOnPositiveSide) {
    for (int i = 0; i < 8; ++i) {
        const double beta = 0.25 * i;
        bool seen = false;
        for (int k = 0; k <= 16; ++k) {
            const double gamma = 0.25 * k;
            if (beta + gamma - 1.0 <= 0.0) continue;
            const bool p = classify_esa(disk(beta, gamma)).proven();
            if (seen) EXPECT_TRUE(p) << beta << " " << gamma;
            seen = seen || p;
        }
    }
}

TEST(ClassifyEsa, UnequalBounds) {
    // D_- rho_- / (D_+ rho_+) scales the ratio
    auto p = disk(1.5, 0.0);
    p.components[0].D_minus = 0.5;
    EXPECT_EQ(classify_esa(p).outcome, Outcome::NotProven);
}

TEST(ClassifySc, WorkedExamples) {
    EXPECT_EQ(classify_sc(disk(1.0, 0.0)).outcome, Outcome::Proven);
    EXPECT_EQ(classify_sc(disk(0.5, 0.0)).outcome, Outcome::NotProven);
    const auto big = classify_sc(disk(2.5, -1.0));  // rho = t^{-1} <= exp(L t^{-1/4})
    EXPECT_EQ(big.outcome, Outcome::Proven);
    EXPECT_TRUE(big.details.count("c0:rho_bound"));
    const auto eq = classify_sc(disk(1.0, 0.0));
    EXPECT_NE(eq.details.at("c0:product_exponent").note.find("log-margin"), std::string::npos);
}

TEST(ClassifySc, PuncturedDiskLogMargin) {
    auto p = uniform_profile(DomainSpec::punctured_ball(1.0), 0.0, 0.0, 1.0, 1.0, 0.2);
    p.components[1] = make_component(1, 1, 1.0, 0.0, 1.0, 1.0, 0.2);
    const auto v = classify_sc(p);
    EXPECT_EQ(v.outcome, Outcome::Proven);
    EXPECT_NE(v.details.at("c0:product_exponent").note.find("log-margin"), std::string::npos);
    p.components[0] = make_component(0, 0, 0.0, -0.5, 1.0, 1.0, 0.2);
    EXPECT_EQ(classify_sc(p).outcome, Outcome::NotProven);
}

TEST(ClassifySc, GridMatchesRule) {
    for (int i = 0; i <= 12; ++i)
        for (int k = -4; k <= 8; ++k) {
            const double beta = 0.25 * i, gamma = 0.5 * k;
            EXPECT_EQ(classify_sc(disk(beta, gamma)).proven(), oracle::collar_sc_rule(beta, gamma, 1))
                << beta << " " << gamma;
        }
}

TEST(Criteria, ScalingInvariance) {
    for (double beta : {0.0, 1.0, 1.5, 2.5})
        for (double gamma : {-1.0, 0.0, 3.0}) {
            const auto a = disk(beta, gamma), b = disk(beta, gamma, 3.0, 0.2);
            EXPECT_EQ(classify_esa(a).outcome, classify_esa(b).outcome);
            EXPECT_EQ(classify_sc(a).outcome, classify_sc(b).outcome);
        }
}

TEST(Criteria, UnsupportedDomains) {
    EXPECT_EQ(code_of([] { classify_esa(half_strip_profile()); }), ErrorCode::UnsupportedDomain);
    EXPECT_EQ(code_of([] { classify_sc(exterior(2.0, 2.0)); }), ErrorCode::UnsupportedDomain);
    EXPECT_EQ(code_of([] { classify_at_infinity(disk(1.0, 0.0), Question::SC); }), ErrorCode::UnsupportedDomain);
    auto p = exterior(2.0, 2.0);
    p.infinity.reset();
    EXPECT_EQ(code_of([&] { classify_at_infinity(p, Question::ESA); }), ErrorCode::MissingInfinityRecord);
}

TEST(ClassifyAtInfinity, Examples) {
    const auto v = classify_at_infinity(exterior(2.0, 2.0), Question::SC);
    EXPECT_EQ(v.outcome, Outcome::Proven);
    EXPECT_EQ(v.theorem, "infinity_sc");
    EXPECT_EQ(classify_at_infinity(exterior(2.0, 1.0, RhoGrowth::Exp, 0.5), Question::SC).outcome, Outcome::Proven);
    EXPECT_EQ(classify_at_infinity(exterior(2.0, 1.0, RhoGrowth::Exp, 0.6), Question::SC).outcome, Outcome::NotProven);
    EXPECT_EQ(classify_at_infinity(exterior(2.0, 2.0, RhoGrowth::Exp, 0.5), Question::SC).outcome, Outcome::NotProven);
    EXPECT_EQ(classify_at_infinity(exterior(2.0, 3.0), Question::SC).outcome, Outcome::NotProven);
    EXPECT_EQ(classify_at_infinity(exterior(2.0, 3.0), Question::ESA).outcome, Outcome::NotProven);
    EXPECT_EQ(classify_at_infinity(exterior(2.0, 2.0), Question::ESA).theorem, "infinity_esa");
    // the finite boundary still has to pass
    EXPECT_EQ(classify_at_infinity(exterior(0.0, 2.0), Question::ESA).outcome, Outcome::NotProven);
}

TEST(SigmaCheck, PureLogAndLogLog) {
    EXPECT_EQ(sigma_check(SigmaSpec::pure_log(1.0)), SigmaStatus::Satisfied);
    EXPECT_EQ(sigma_check(SigmaSpec::pure_log(0.9)), SigmaStatus::ViolatedSigma2);
    EXPECT_EQ(sigma_check(SigmaSpec::pure_log(0.8)), SigmaStatus::ViolatedSigma2);
    EXPECT_EQ(sigma_check(SigmaSpec::pure_log(1.1)), SigmaStatus::ViolatedSigma1);
    EXPECT_EQ(sigma_check(SigmaSpec::pure_log(-0.1)), SigmaStatus::ViolatedSigma1);
    EXPECT_EQ(sigma_check(SigmaSpec::log_log_corrected()), SigmaStatus::Satisfied);
    EXPECT_EQ(sigma_check(SigmaSpec::pure_log(1.0, 1.5)), SigmaStatus::ViolatedSigma1);
}

TEST(SigmaCheck, Tabulated) {
    // G(t) = ln(t) sampled: slope exactly 1/t
    std::vector<double> t, g;
    for (int m = 60; m >= 0; --m) {
        t.push_back(std::ldexp(1.0, -m));
        g.push_back(std::log(t.back()));
    }
    EXPECT_EQ(sigma_check(SigmaSpec::tabulated(t, g)), SigmaStatus::Satisfied);
    g[30] = 1.0;
    EXPECT_EQ(sigma_check(SigmaSpec::tabulated(t, g)), SigmaStatus::ViolatedSigma1);
    EXPECT_THROW(SigmaSpec::tabulated({0.5, 0.25}, {0.0, 0.0}), Error);
}

TEST(ClassifyEsaMetric, Branches) {
    const auto c1 = classify_esa_metric(disk(2.0, 0.0));
    EXPECT_EQ(c1.outcome, Outcome::Proven);
    EXPECT_EQ(c1.theorem, "metric_esa:i");
    const auto ii = classify_esa_metric(disk(0.0, 4.0), SigmaSpec::pure_log(1.0));
    EXPECT_EQ(ii.outcome, Outcome::Proven);
    EXPECT_EQ(ii.theorem, "metric_esa:ii");
    EXPECT_TRUE(all_flags_true(ii));
    EXPECT_EQ(classify_esa_metric(disk(0.0, 0.0), SigmaSpec::pure_log(1.0)).outcome, Outcome::Inconclusive);
    EXPECT_EQ(classify_esa_metric(disk(0.0, 4.0)).outcome, Outcome::Inconclusive);
    EXPECT_EQ(classify_esa_metric(disk(0.0, 4.0), SigmaSpec::pure_log(0.9)).outcome, Outcome::Inconclusive);
    EXPECT_EQ(classify_esa_metric(half_strip_profile(), SigmaSpec::pure_log(1.0)).outcome, Outcome::Inconclusive);
}

TEST(ClassifyScMetric, PowerSplits) {
    // rho = delta keeps rho_tilde in L^1(rho dx) for omega = delta^2
    const auto p = disk(0.0, 1.0);
    const auto yes = classify_sc_metric(p, power_split(p, 2.0));
    EXPECT_EQ(yes.outcome, Outcome::Proven) << yes.to_json().dump();
    EXPECT_EQ(yes.theorem, "metric_sc:ii");
    // omega = delta^{-3}: terms shrink geometrically, the series converges
    const auto no = classify_sc_metric(p, power_split(p, -3.0));
    EXPECT_EQ(no.outcome, Outcome::NotProven) << no.to_json().dump();
}

TEST(ClassifyScMetric, CompleteWithConstantOmega) {
    const auto p = disk(2.0, 0.0);
    WeightSplit w;
    w.omega = [](const Point&) { return 1.0; };
    w.rho_tilde = [&](const Point& x) { return evaluate_weight(p, x); };
    const auto v = classify_sc_metric(p, w);
    EXPECT_EQ(v.outcome, Outcome::Proven);
    EXPECT_EQ(v.theorem, "metric_sc:i");
}

TEST(ClassifyScMetric, InvalidSplit) {
    const auto p = disk(0.0, 0.0);
    WeightSplit bad;
    bad.omega = [](const Point&) { return 2.0; };
    bad.rho_tilde = [](const Point&) { return 1.0; };
    EXPECT_EQ(code_of([&] { classify_sc_metric(p, bad); }), ErrorCode::InvalidSplit);
    // rho = 1 and omega = delta^2: rho_tilde = delta^{-2} is not integrable
    EXPECT_EQ(code_of([&] { classify_sc_metric(p, power_split(p, 2.0)); }), ErrorCode::InvalidSplit);
    EXPECT_EQ(code_of([&] { classify_sc_metric(p, WeightSplit{}); }), ErrorCode::InvalidSplit);
}

TEST(Verdict, JsonShape) {
    const auto j = classify_esa(disk(1.5, 0.0)).to_json();
    EXPECT_EQ(j.at("question"), "ESA");
    EXPECT_EQ(j.at("outcome"), "Proven");
    EXPECT_EQ(j.at("theorem"), "collar_esa");
    const auto& d = j.at("details").at("c0:hardy_ratio>=1");
    EXPECT_TRUE(d.contains("lhs"));
    EXPECT_TRUE(d.contains("rhs"));
    EXPECT_EQ(d.at("ok"), true);
}
