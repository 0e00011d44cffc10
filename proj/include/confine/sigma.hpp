#pragma once

// Exponent profiles G(t) for weights e^{G(delta_M)}: the admissibility
// condition (0 <= G' <= 1/t on (0, a0), G = 0 beyond, and the dyadic series
// sum 4^{-m} e^{-2G(2^{-m} a0)} diverging).

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "numerics.hpp"

namespace confine {

struct SigmaSpec {
    enum class Family { PureLog, LogLogCorrected, Tabulated, Custom };

    Family family = Family::PureLog;
    double sigma = 1.0;  // PureLog exponent
    double a0 = 1.0;
    std::vector<double> t_samples;  // Tabulated: increasing depths in (0, a0]
    std::vector<double> g_samples;  // Tabulated: G at those depths
    std::function<double(double)> custom_g, custom_dg;

    static SigmaSpec pure_log(double sigma, double a0 = 1.0) {
        SigmaSpec s;
        s.family = Family::PureLog;
        s.sigma = sigma;
        s.a0 = a0;
        return s;
    }
    static SigmaSpec log_log_corrected(double a0 = 1.0) {
        SigmaSpec s;
        s.family = Family::LogLogCorrected;
        s.a0 = a0;
        return s;
    }
    static SigmaSpec tabulated(std::vector<double> t, std::vector<double> g, double a0 = 1.0) {
        if (t.size() != g.size() || t.size() < 2)
            throw Error(ErrorCode::InvalidArgument, "tabulated G needs matching samples (at least two)");
        for (std::size_t i = 1; i < t.size(); ++i)
            if (!(t[i] > t[i - 1] && t[0] > 0.0))
                throw Error(ErrorCode::InvalidArgument, "tabulated depths must be positive and increasing");
        SigmaSpec s;
        s.family = Family::Tabulated;
        s.t_samples = std::move(t);
        s.g_samples = std::move(g);
        s.a0 = a0;
        return s;
    }
    static SigmaSpec custom(std::function<double(double)> g, std::function<double(double)> dg, double a0 = 1.0) {
        SigmaSpec s;
        s.family = Family::Custom;
        s.custom_g = std::move(g);
        s.custom_dg = std::move(dg);
        s.a0 = a0;
        return s;
    }

    std::string name() const {
        switch (family) {
            case Family::PureLog: return "PureLog(" + std::to_string(sigma) + ")";
            case Family::LogLogCorrected: return "LogLogCorrected";
            case Family::Tabulated: return "Tabulated";
            case Family::Custom: return "Custom";
        }
        return "?";
    }

    /// G(t); zero for t >= a0. Tabulated values are interpolated linearly in ln t.
    double G(double t) const {
        if (t >= a0) return 0.0;
        switch (family) {
            case Family::PureLog: return sigma * std::log(t / a0);
            case Family::LogLogCorrected: return std::log(t / a0) + 0.5 * std::log1p(std::log(a0 / t));
            case Family::Custom: return custom_g(t);
            case Family::Tabulated: {
                const auto& ts = t_samples;
                if (t <= ts.front()) {
                    // continue with the first slope in ln t
                    const double s = (g_samples[1] - g_samples[0]) / std::log(ts[1] / ts[0]);
                    return g_samples[0] + s * std::log(t / ts[0]);
                }
                std::size_t i = 1;
                while (i + 1 < ts.size() && ts[i] < t) ++i;
                if (t >= ts.back()) {
                    const double x = std::log(t / ts.back()) / std::log(a0 / ts.back());
                    return g_samples.back() * (1.0 - std::min(1.0, x));
                }
                const double x = std::log(t / ts[i - 1]) / std::log(ts[i] / ts[i - 1]);
                return g_samples[i - 1] + x * (g_samples[i] - g_samples[i - 1]);
            }
        }
        return 0.0;
    }

    /// G'(t) (a.e.); zero for t >= a0.
    double dG(double t) const {
        if (t >= a0) return 0.0;
        switch (family) {
            case Family::PureLog: return sigma / t;
            case Family::LogLogCorrected: return (1.0 - 0.5 / (1.0 + std::log(a0 / t))) / t;
            case Family::Custom:
                if (custom_dg) return custom_dg(t);
                return (custom_g(t * (1 + 1e-6)) - custom_g(t * (1 - 1e-6))) / (2e-6 * t);
            case Family::Tabulated: {
                const double h = 1e-7 * t;
                return (G(t + h) - G(t - h)) / (2.0 * h);
            }
        }
        return 0.0;
    }
};

enum class SigmaStatus { Satisfied, ViolatedSigma1, ViolatedSigma2, Inconclusive };

inline const char* to_string(SigmaStatus s) {
    switch (s) {
        case SigmaStatus::Satisfied: return "Satisfied";
        case SigmaStatus::ViolatedSigma1: return "ViolatedSigma1";
        case SigmaStatus::ViolatedSigma2: return "ViolatedSigma2";
        case SigmaStatus::Inconclusive: return "Inconclusive";
    }
    return "?";
}

/// sum_m 4^{-m} e^{-2 G(2^{-m} a0)}, m = 1..levels.
inline std::vector<double> sigma_series_terms(const SigmaSpec& s, int levels = 60) {
    std::vector<double> terms;
    terms.reserve(static_cast<std::size_t>(levels));
    for (int m = 1; m <= levels; ++m) {
        const double t = std::ldexp(s.a0, -m);
        terms.push_back(std::exp(-2.0 * (s.G(t) + m * std::numbers::ln2)));
    }
    return terms;
}

/// The first condition is checked before the series: a Sigma1 violation wins.
inline SigmaStatus sigma_check(const SigmaSpec& s, DivergenceTolerance tol = {}) {
    if (!(s.a0 > 0.0 && s.a0 <= 1.0)) return SigmaStatus::ViolatedSigma1;
    switch (s.family) {
        case SigmaSpec::Family::PureLog:
            if (s.sigma < 0.0 || s.sigma > 1.0) return SigmaStatus::ViolatedSigma1;
            break;
        case SigmaSpec::Family::Tabulated: {
            const auto& ts = s.t_samples;
            const auto& gs = s.g_samples;
            if (ts.back() > s.a0) return SigmaStatus::ViolatedSigma1;
            for (std::size_t i = 0; i < ts.size(); ++i) {
                if (gs[i] > 1e-12) return SigmaStatus::ViolatedSigma1;
                if (i == 0) continue;
                const double dg = gs[i] - gs[i - 1];
                if (dg < -1e-12 || dg > std::log(ts[i] / ts[i - 1]) + 1e-12) return SigmaStatus::ViolatedSigma1;
            }
            break;
        }
        case SigmaSpec::Family::LogLogCorrected:
        case SigmaSpec::Family::Custom: {
            // sampled check of 0 <= t G'(t) <= 1 and G <= 0
            for (int k = 0; k <= 400; ++k) {
                const double t = s.a0 * std::exp2(-60.0 * k / 400.0) * (1.0 - 1e-9);
                const double tg = t * s.dG(t);
                if (tg < -1e-9 || tg > 1.0 + 1e-9 || s.G(t) > 1e-12) return SigmaStatus::ViolatedSigma1;
            }
            break;
        }
    }
    const auto terms = sigma_series_terms(s);
    const auto test = classify_series(terms, tol);
    switch (test.verdict) {
        case Convergence::Divergent: return SigmaStatus::Satisfied;
        case Convergence::Convergent: return SigmaStatus::ViolatedSigma2;
        default: return SigmaStatus::Inconclusive;
    }
}

}  // namespace confine
