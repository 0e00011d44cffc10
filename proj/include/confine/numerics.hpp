#pragma once

// Shared numerical building blocks: radial coefficient laws, adaptive
// quadrature, and the dyadic divergence classifier used by every oracle.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "errors.hpp"

namespace confine {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// c * t^e on (0, inf).
struct PowerLaw {
    double coeff = 1.0;
    double exponent = 0.0;

    double operator()(double t) const { return coeff * std::pow(t, exponent); }
    double derivative(double t) const {
        return exponent == 0.0 ? 0.0 : coeff * exponent * std::pow(t, exponent - 1.0);
    }
    /// ∫_0^t, or nullopt when the singularity at 0 is not integrable.
    std::optional<double> integral_from_zero(double t) const {
        if (exponent <= -1.0) return std::nullopt;
        return coeff * std::pow(t, exponent + 1.0) / (exponent + 1.0);
    }
    double integral(double lo, double hi) const {
        if (exponent == -1.0) return coeff * std::log(hi / lo);
        return coeff * (std::pow(hi, exponent + 1.0) - std::pow(lo, exponent + 1.0)) / (exponent + 1.0);
    }
};

// Quintic smoothstep: C2, 0 below 0, 1 above 1, max slope 15/8.
inline double smooth_ramp(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    return x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
}
inline double smooth_ramp_d1(double x) {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    return 30.0 * x * x * (1.0 - x) * (1.0 - x);
}
inline double smooth_ramp_d2(double x) {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    return 60.0 * x * (1.0 - x) * (1.0 - 2.0 * x);
}

/// A positive scalar function of the depth t > 0 together with what is known
/// about its behaviour as t -> 0. Default-constructed laws are identically 1.
class ScalarLaw {
public:
    using Fn = std::function<double(double)>;

    ScalarLaw()
        : value_([](double) { return 1.0; }),
          derivative_([](double) { return 0.0; }),
          leading_(PowerLaw{1.0, 0.0}),
          exact_depth_(kInf) {}

    static ScalarLaw constant(double c) { return power(c, 0.0); }

    static ScalarLaw power(double coeff, double exponent) {
        PowerLaw law{coeff, exponent};
        ScalarLaw out;
        out.value_ = law;
        out.derivative_ = [law](double t) { return law.derivative(t); };
        out.leading_ = law;
        out.exact_depth_ = kInf;
        return out;
    }

    /// c t^e below nu0/2, the constant 1 above nu0, cosine ramp in between.
    static ScalarLaw blended(double coeff, double exponent, double nu0) {
        PowerLaw law{coeff, exponent};
        const double lo = 0.5 * nu0;
        auto weight = [lo, nu0](double t) {
            if (t <= lo) return 0.0;
            if (t >= nu0) return 1.0;
            return 0.5 * (1.0 - std::cos(std::numbers::pi * (t - lo) / (nu0 - lo)));
        };
        auto weight_d = [lo, nu0](double t) {
            if (t <= lo || t >= nu0) return 0.0;
            const double k = std::numbers::pi / (nu0 - lo);
            return 0.5 * k * std::sin(k * (t - lo));
        };
        ScalarLaw out;
        out.value_ = [law, weight](double t) {
            const double s = weight(t);
            return (1.0 - s) * law(t) + s;
        };
        out.derivative_ = [law, weight, weight_d](double t) {
            const double s = weight(t);
            return (1.0 - s) * law.derivative(t) + weight_d(t) * (1.0 - law(t));
        };
        out.leading_ = law;
        out.exact_depth_ = lo;
        return out;
    }

    /// Arbitrary law. `leading` describes the t -> 0 asymptotics (needed for
    /// closed-form singular integrals); `exact_depth` > 0 asserts the law equals
    /// `leading` exactly on (0, exact_depth).
    static ScalarLaw custom(Fn value, Fn derivative = {}, std::optional<PowerLaw> leading = std::nullopt,
                            double exact_depth = 0.0) {
        ScalarLaw out;
        out.value_ = std::move(value);
        out.derivative_ = std::move(derivative);
        out.leading_ = leading;
        out.exact_depth_ = leading ? exact_depth : 0.0;
        return out;
    }

    double operator()(double t) const { return value_(t); }

    double derivative(double t) const {
        if (derivative_) return derivative_(t);
        const double h = 1e-5 * std::max(t, 1e-300);
        return (value_(t + h) - value_(t - h)) / (2.0 * h);
    }

    const std::optional<PowerLaw>& leading() const { return leading_; }
    double exact_depth() const { return exact_depth_; }
    bool has_derivative() const { return static_cast<bool>(derivative_); }

    ScalarLaw pow(double q) const {
        ScalarLaw out;
        Fn f = value_;
        out.value_ = [f, q](double t) { return std::pow(f(t), q); };
        ScalarLaw self = *this;
        out.derivative_ = [self, q](double t) {
            return q * std::pow(self(t), q - 1.0) * self.derivative(t);
        };
        if (leading_) out.leading_ = PowerLaw{std::pow(leading_->coeff, q), leading_->exponent * q};
        out.exact_depth_ = exact_depth_;
        return out;
    }

    friend ScalarLaw operator*(const ScalarLaw& a, const ScalarLaw& b) {
        ScalarLaw out;
        out.value_ = [a, b](double t) { return a(t) * b(t); };
        out.derivative_ = [a, b](double t) { return a.derivative(t) * b(t) + a(t) * b.derivative(t); };
        if (a.leading_ && b.leading_) {
            out.leading_ = PowerLaw{a.leading_->coeff * b.leading_->coeff,
                                    a.leading_->exponent + b.leading_->exponent};
            out.exact_depth_ = std::min(a.exact_depth_, b.exact_depth_);
        } else {
            out.exact_depth_ = 0.0;
        }
        return out;
    }

private:
    Fn value_;
    Fn derivative_;
    std::optional<PowerLaw> leading_;
    double exact_depth_ = 0.0;
};

/// Adaptive Gauss-Kronrod 7/15 on a finite interval without interior singularities.
template <class F>
double integrate(F&& f, double lo, double hi, double rel_tol = 1e-12, unsigned max_depth = 10) {
    if (hi == lo) return 0.0;
    double err = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        std::forward<F>(f), lo, hi, max_depth, rel_tol, &err);
}

enum class Convergence { Convergent, Divergent, Inconclusive };

inline const char* to_string(Convergence c) {
    switch (c) {
        case Convergence::Convergent: return "Convergent";
        case Convergence::Divergent: return "Divergent";
        case Convergence::Inconclusive: return "Inconclusive";
    }
    return "?";
}

/// Tolerances of the tail-exponent test. `rate_tol` is measured in powers of
/// two per index (the local power exponent of a dyadic piece sequence).
struct DivergenceTolerance {
    double rate_tol = 0.05;
    double power_tol = 0.05;
    double power_band = 0.25;
};

struct SeriesTest {
    Convergence verdict = Convergence::Inconclusive;
    double partial_sum = 0.0;
    double estimate = 0.0;   // partial sum plus tail estimate; +inf when divergent
    double log2_ratio = 0.0; // fitted log2(a_{m+1}/a_m) over the tail
    double power = 0.0;      // fitted algebraic decay exponent over the tail
};

namespace detail {
inline double ls_slope(std::span<const double> x, std::span<const double> y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}
}  // namespace detail

/// Decides whether sum_m terms[m] converges from the behaviour of its tail
/// (last half of the supplied terms): geometric rate first, then an algebraic
/// fit when the rate is within tolerance of 1. Harmonic tails are divergent.
inline SeriesTest classify_series(std::span<const double> terms, DivergenceTolerance tol = {}) {
    SeriesTest out;
    for (double a : terms) {
        if (!std::isfinite(a)) {
            out.verdict = Convergence::Divergent;
            out.partial_sum = out.estimate = kInf;
            out.log2_ratio = kInf;
            return out;
        }
        out.partial_sum += std::abs(a);
    }
    const std::size_t n = terms.size();
    if (n < 8) {
        out.verdict = Convergence::Inconclusive;
        out.estimate = out.partial_sum;
        return out;
    }
    if (terms[n - 1] == 0.0) {
        // Decayed below the representable range: nothing left to sum.
        out.verdict = Convergence::Convergent;
        out.estimate = out.partial_sum;
        out.log2_ratio = -kInf;
        return out;
    }
    std::vector<double> idx, logs, logidx;
    for (std::size_t m = n / 2; m < n; ++m) {
        const double a = std::abs(terms[m]);
        if (a <= 0.0) continue;
        idx.push_back(static_cast<double>(m));
        logidx.push_back(std::log(static_cast<double>(m + 1)));
        logs.push_back(std::log(a));
    }
    if (idx.size() < 4) {
        out.verdict = Convergence::Inconclusive;
        out.estimate = out.partial_sum;
        return out;
    }
    out.log2_ratio = detail::ls_slope(idx, logs) / std::numbers::ln2;
    out.power = -detail::ls_slope(logidx, logs);
    const double last = std::abs(terms[n - 1]);
    if (out.log2_ratio < -tol.rate_tol) {
        const double r = std::exp2(out.log2_ratio);
        out.verdict = Convergence::Convergent;
        out.estimate = out.partial_sum + last * r / (1.0 - r);
    } else if (out.log2_ratio > tol.rate_tol) {
        out.verdict = Convergence::Divergent;
        out.estimate = kInf;
    } else if (out.power <= 1.0 + tol.power_tol) {
        out.verdict = Convergence::Divergent;
        out.estimate = kInf;
    } else if (out.power >= 1.0 + tol.power_band) {
        out.verdict = Convergence::Convergent;
        out.estimate = out.partial_sum + last * static_cast<double>(n) / (out.power - 1.0);
    } else {
        out.verdict = Convergence::Inconclusive;
        out.estimate = out.partial_sum;
    }
    return out;
}

struct DyadicIntegral {
    SeriesTest test;
    std::vector<double> pieces;  // pieces[m] = ∫ over [upto 2^{-m-1}, upto 2^{-m}]

    bool divergent() const { return test.verdict == Convergence::Divergent; }
    bool finite() const { return test.verdict == Convergence::Convergent; }
    double value() const { return test.estimate; }
};

/// ∫_0^upto f(t) dt for f with a (possibly non-integrable) singularity at 0,
/// summed over dyadic shells and classified by the tail of the shell series.
template <class F>
DyadicIntegral dyadic_integral_from_zero(F&& f, double upto, int levels = 60, DivergenceTolerance tol = {}) {
    DyadicIntegral out;
    out.pieces.reserve(static_cast<std::size_t>(levels));
    double hi = upto;
    for (int m = 0; m < levels; ++m) {
        const double lo = 0.5 * hi;
        double piece = integrate(f, lo, hi, 1e-10, 6);
        if (!std::isfinite(piece)) piece = kInf;
        out.pieces.push_back(piece);
        if (piece == kInf) break;
        hi = lo;
    }
    out.test = classify_series(out.pieces, tol);
    return out;
}

/// Integral of law^q over (0, upto): closed form on the exact power region,
/// quadrature beyond it, dyadic classification for laws with no exact region.
inline std::optional<double> law_integral_from_zero(const ScalarLaw& law, double q, double upto) {
    if (upto <= 0.0) return 0.0;
    const auto& lead = law.leading();
    if (lead && law.exact_depth() > 0.0) {
        const PowerLaw lq{std::pow(lead->coeff, q), lead->exponent * q};
        const double split = std::min(upto, law.exact_depth());
        auto head = lq.integral_from_zero(split);
        if (!head) return std::nullopt;
        if (split >= upto) return head;
        return *head + integrate([&](double t) { return std::pow(law(t), q); }, split, upto);
    }
    auto dy = dyadic_integral_from_zero([&](double t) { return std::pow(law(t), q); }, upto);
    if (dy.finite()) return dy.value();
    if (dy.divergent()) return std::nullopt;
    throw Error(ErrorCode::NonRadialProfile, "cannot decide integrability of a custom law near 0");
}

/// ∫_lo^hi law^q, exact on the power region.
inline double law_integral(const ScalarLaw& law, double q, double lo, double hi) {
    const auto& lead = law.leading();
    if (lead && hi <= law.exact_depth()) {
        return PowerLaw{std::pow(lead->coeff, q), lead->exponent * q}.integral(lo, hi);
    }
    return integrate([&](double t) { return std::pow(law(t), q); }, lo, hi, 1e-12);
}

}  // namespace confine
