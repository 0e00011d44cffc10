#pragma once

// One-dimensional oracles for u -> -(1/w)(p u')' on (0, c): Feller boundary
// classification (mass conservation) and Weyl limit point / limit circle
// (essential self-adjointness). Only t -> 0 carries information; t = c is an
// artificial cut of a reduction and is treated as inaccessible / limit point.

#include <array>
#include <cmath>
#include <functional>
#include <string>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/numeric/odeint.hpp>

#include "profiles.hpp"

namespace confine {

struct SLProblem {
    double c = 1.0;
    std::function<double(double)> p;
    std::function<double(double)> w;
    std::function<double(double)> p_prime;  // optional; finite differences otherwise
    std::string label;

    double dp(double t) const {
        if (p_prime) return p_prime(t);
        const double h = 1e-4 * t;
        return (-p(t + 2 * h) + 8 * p(t + h) - 8 * p(t - h) + p(t - 2 * h)) / (12 * h);
    }
};

/// p = D rho t^{beta+gamma}, w = rho t^gamma: the normal model of a codimension-one component.
inline SLProblem reduce_normal_model(const BoundaryComponent& comp, int d, double c) {
    if (d - comp.d_j != 1)
        throw Error(ErrorCode::WrongCodimension, "normal model needs codimension 1, component " +
                                                     std::to_string(comp.id) + " has " + std::to_string(d - comp.d_j));
    const double D = comp.D_plus, rho = comp.rho_plus, b = comp.beta, g = comp.gamma;
    SLProblem sl;
    sl.c = c;
    sl.p = [=](double t) { return D * rho * std::pow(t, b + g); };
    sl.w = [=](double t) { return rho * std::pow(t, g); };
    sl.p_prime = [=](double t) { return D * rho * (b + g) * std::pow(t, b + g - 1.0); };
    sl.label = "normal(beta=" + std::to_string(b) + ",gamma=" + std::to_string(g) + ")";
    return sl;
}

/// p = t^a, w = t^b on (0, c).
inline SLProblem power_problem(double a, double b, double c = 1.0) {
    SLProblem sl;
    sl.c = c;
    sl.p = [a](double t) { return std::pow(t, a); };
    sl.w = [b](double t) { return std::pow(t, b); };
    sl.p_prime = [a](double t) { return a * std::pow(t, a - 1.0); };
    sl.label = "power(" + std::to_string(a) + "," + std::to_string(b) + ")";
    return sl;
}

/// p = a rho J, w = rho J along the normal ray of component j (J from the component's geometry).
inline SLProblem reduce_collar(const CoefficientProfile& prof, int j, double c) {
    const auto& comp = prof.component(j);
    const auto dom = prof.domain;
    if (!(c > 0 && c <= dom.reach(j))) throw Error(ErrorCode::InvalidArgument, "c must lie in (0, reach]");
    SLProblem sl;
    sl.c = c;
    const ScalarLaw a = comp.a, rho = comp.rho;
    sl.p = [=](double t) { return a(t) * rho(t) * normal_jacobian(dom, j, t); };
    sl.w = [=](double t) { return rho(t) * normal_jacobian(dom, j, t); };
    sl.p_prime = [=](double t) {
        const double J = normal_jacobian(dom, j, t);
        const double dJ = J * distance_laplacian(dom, j, t);
        return (a.derivative(t) * rho(t) + a(t) * rho.derivative(t)) * J + a(t) * rho(t) * dJ;
    };
    sl.label = "collar(" + std::to_string(j) + ")";
    return sl;
}

/// Radial reduction at the origin component of a punctured ball or punctured space.
inline SLProblem reduce_radial(const CoefficientProfile& prof, double c) {
    const auto k = prof.domain.kind;
    if (k != DomainKind::PuncturedBall && k != DomainKind::PuncturedSpace)
        throw Error(ErrorCode::WrongComponentKind, "radial reduction needs a punctured ball or punctured space");
    if (prof.component(0).d_j != 0) throw Error(ErrorCode::WrongComponentKind, "component 0 is not a point");
    SLProblem sl = reduce_collar(prof, 0, c);
    sl.label = "radial(d=" + std::to_string(prof.dim()) + ")";
    return sl;
}

/// The same operator seen from the other end: t -> c - t.
inline SLProblem mirror(const SLProblem& sl) {
    SLProblem m;
    m.c = sl.c;
    const double c = sl.c;
    auto p = sl.p, w = sl.w;
    m.p = [=](double t) { return p(c - t); };
    m.w = [=](double t) { return w(c - t); };
    m.p_prime = [sl](double t) { return -sl.dp(sl.c - t); };
    m.label = sl.label + "@c";
    return m;
}

enum class Endpoint { Zero, C };
enum class FellerClass { Regular, Exit, Entrance, Natural, Inconclusive };
enum class WeylClass { LimitPoint, LimitCircle, Inconclusive };

inline const char* to_string(FellerClass f) {
    switch (f) {
        case FellerClass::Regular: return "Regular";
        case FellerClass::Exit: return "Exit";
        case FellerClass::Entrance: return "Entrance";
        case FellerClass::Natural: return "Natural";
        case FellerClass::Inconclusive: return "Inconclusive";
    }
    return "?";
}
inline const char* to_string(WeylClass w) {
    switch (w) {
        case WeylClass::LimitPoint: return "LimitPoint";
        case WeylClass::LimitCircle: return "LimitCircle";
        case WeylClass::Inconclusive: return "Inconclusive";
    }
    return "?";
}

/// Finite(value) or Divergent, or Inconclusive when the tail test cannot tell.
struct IntegralValue {
    Convergence status = Convergence::Inconclusive;
    double value = 0.0;
    bool finite() const { return status == Convergence::Convergent; }
    bool divergent() const { return status == Convergence::Divergent; }
};

struct EndpointClass {
    FellerClass feller = FellerClass::Inconclusive;
    WeylClass weyl = WeylClass::Inconclusive;
    IntegralValue sigma_integral, n_integral;
    bool accessible() const { return feller == FellerClass::Regular || feller == FellerClass::Exit; }
};

struct OracleOptions {
    int levels = 60;
    DivergenceTolerance tol{};
};

namespace detail {

// Fixed 30-point Gauss rule: each dyadic shell has ratio 2 and smooth integrands.
using shell_rule = boost::math::quadrature::gauss<double, 30>;

// ∫_0^upto (∫_0^t inner) outer dt with both integrals decided on dyadic shells.
template <class Inner, class Outer>
IntegralValue nested_integral(Inner inner, Outer outer, double upto, const OracleOptions& opt) {
    const auto in = dyadic_integral_from_zero(inner, upto, opt.levels, opt.tol);
    if (in.divergent()) return {Convergence::Divergent, kInf};
    if (!in.finite()) return {Convergence::Inconclusive, 0.0};
    // cumulative inner integral at the shell points t_m = upto 2^{-m}
    const std::size_t L = in.pieces.size();
    std::vector<double> at(L + 1, 0.0);
    at[L] = in.value() - in.test.partial_sum;  // tail below the last shell
    for (std::size_t m = L; m-- > 0;) at[m] = at[m + 1] + in.pieces[m];
    std::vector<double> pieces;
    pieces.reserve(L);
    double hi = upto;
    for (std::size_t m = 0; m < L; ++m) {
        const double lo = 0.5 * hi;
        const double base = at[m + 1];
        auto integrand = [&](double t) { return (base + shell_rule::integrate(inner, lo, t)) * outer(t); };
        pieces.push_back(shell_rule::integrate(integrand, lo, hi));
        hi = lo;
    }
    const auto test = classify_series(pieces, opt.tol);
    return {test.verdict, test.estimate};
}

}  // namespace detail

/// Feller classification at an endpoint from
///   Sigma = ∫ (∫_0^t 1/p) w dt   and   N = ∫ (∫_0^t w) / p dt.
/// The endpoint is accessible (leaks mass under the minimal semigroup) iff Sigma < ∞.
inline EndpointClass feller_classify(const SLProblem& sl, Endpoint e = Endpoint::Zero, const OracleOptions& opt = {}) {
    if (e == Endpoint::C) return feller_classify(mirror(sl), Endpoint::Zero, opt);
    EndpointClass out;
    auto inv_p = [&](double t) { return 1.0 / sl.p(t); };
    auto w = [&](double t) { return sl.w(t); };
    try {
        out.sigma_integral = detail::nested_integral(inv_p, w, sl.c, opt);
        out.n_integral = detail::nested_integral(w, inv_p, sl.c, opt);
    } catch (const std::exception&) {
        out.feller = FellerClass::Inconclusive;
        return out;
    }
    const auto& S = out.sigma_integral;
    const auto& N = out.n_integral;
    if (S.status == Convergence::Inconclusive || N.status == Convergence::Inconclusive)
        out.feller = FellerClass::Inconclusive;
    else if (S.finite() && N.finite())
        out.feller = FellerClass::Regular;
    else if (S.finite())
        out.feller = FellerClass::Exit;
    else if (N.finite())
        out.feller = FellerClass::Entrance;
    else
        out.feller = FellerClass::Natural;
    return out;
}

struct WeylDetail {
    WeylClass weyl = WeylClass::Inconclusive;
    std::array<SeriesTest, 2> tests{};  // L^2(w) tails of the two solutions
};

/// Weyl alternative at 0 for -(p u')' = E w u, E < 0. Integrates (u, p u') in
/// sigma = ln(c/t) from the anchor c with initial data (1, 0) and (0, 1) and
/// accumulates ∫ u^2 w over dyadic shells.
inline WeylDetail weyl_detail(const SLProblem& sl, double E = -1.0, const OracleOptions& opt = {}) {
    if (!(E < 0)) throw Error(ErrorCode::InvalidArgument, "Weyl test needs E < 0");
    namespace ode = boost::numeric::odeint;
    using State = std::array<double, 3>;
    const double c = sl.c;
    auto rhs = [&](const State& y, State& dy, double s) {
        const double t = c * std::exp(-s);
        const double w = sl.w(t);
        dy[0] = -t * y[1] / sl.p(t);
        dy[1] = E * t * w * y[0];
        dy[2] = t * w * y[0] * y[0];
    };
    WeylDetail out;
    bool any_divergent = false, all_convergent = true;
    for (int k = 0; k < 2; ++k) {
        State y{k == 0 ? 1.0 : 0.0, k == 0 ? 0.0 : 1.0, 0.0};
        std::vector<double> pieces;
        pieces.reserve(static_cast<std::size_t>(opt.levels));
        bool blown = false;
        try {
            auto stepper = ode::make_controlled(1e-10, 1e-10, ode::runge_kutta_dopri5<State>());
            for (int m = 0; m < opt.levels; ++m) {
                const double s0 = m * std::numbers::ln2, s1 = (m + 1) * std::numbers::ln2;
                y[2] = 0.0;
                ode::integrate_adaptive(stepper, rhs, y, s0, s1, 1e-3);
                if (!std::isfinite(y[2]) || std::abs(y[0]) > 1e200 || std::abs(y[1]) > 1e200) {
                    blown = true;
                    pieces.push_back(kInf);
                    break;
                }
                pieces.push_back(y[2]);
            }
        } catch (const std::exception&) {
            blown = true;
        }
        SeriesTest t = blown ? SeriesTest{Convergence::Divergent, kInf, kInf, kInf, 0.0}
                             : classify_series(pieces, opt.tol);
        out.tests[static_cast<std::size_t>(k)] = t;
        any_divergent = any_divergent || t.verdict == Convergence::Divergent;
        all_convergent = all_convergent && t.verdict == Convergence::Convergent;
    }
    out.weyl = any_divergent ? WeylClass::LimitPoint
                             : (all_convergent ? WeylClass::LimitCircle : WeylClass::Inconclusive);
    return out;
}

inline WeylClass weyl_classify(const SLProblem& sl, Endpoint e = Endpoint::Zero, double E = -1.0,
                               const OracleOptions& opt = {}) {
    if (e == Endpoint::C) return weyl_detail(mirror(sl), E, opt).weyl;
    return weyl_detail(sl, E, opt).weyl;
}

/// Minimal semigroup preserves ∫ mu w: the endpoint 0 is inaccessible (c is an
/// artificial reflecting cut and does not count).
inline bool conservative(const SLProblem& sl, const OracleOptions& opt = {}) {
    const auto cls = feller_classify(sl, Endpoint::Zero, opt);
    if (cls.feller == FellerClass::Inconclusive)
        throw Error(ErrorCode::InconclusiveEndpoints, "Feller class at 0 is inconclusive for " + sl.label);
    return !cls.accessible();
}

/// Both endpoints limit point (c, being artificial, is counted as limit point).
inline bool esa_1d(const SLProblem& sl, double E = -1.0, const OracleOptions& opt = {}) {
    const auto w = weyl_classify(sl, Endpoint::Zero, E, opt);
    if (w == WeylClass::Inconclusive)
        throw Error(ErrorCode::InconclusiveEndpoints, "Weyl class at 0 is inconclusive for " + sl.label);
    return w == WeylClass::LimitPoint;
}

}  // namespace confine
