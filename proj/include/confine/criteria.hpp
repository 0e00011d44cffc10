#pragma once

// Hypothesis checks for the stochastic-completeness (SC) and essential
// self-adjointness (ESA) criteria: per-collar power-law rules, conditions at
// infinity, and the metric (Agmon-geometry) theorems. Every verdict carries the
// inequalities it evaluated.

#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <json.hpp>

#include "geometry.hpp"
#include "quadform.hpp"
#include "sigma.hpp"

namespace confine {

enum class Question { ESA, SC };
enum class Outcome { Proven, NotProven, Inconclusive };

inline const char* to_string(Question q) { return q == Question::ESA ? "ESA" : "SC"; }
inline const char* to_string(Outcome o) {
    switch (o) {
        case Outcome::Proven: return "Proven";
        case Outcome::NotProven: return "NotProven";
        case Outcome::Inconclusive: return "Inconclusive";
    }
    return "?";
}

struct Check {
    double lhs = 0.0;
    double rhs = 0.0;
    bool ok = false;
    std::string note;
};

/// Outcome plus the hypotheses behind it. A Proven verdict lists only the
/// hypotheses of the branch that proved it, all satisfied.
struct Verdict {
    Question question = Question::SC;
    Outcome outcome = Outcome::Inconclusive;
    std::string theorem;
    std::map<std::string, Check> details;

    bool proven() const { return outcome == Outcome::Proven; }

    nlohmann::json to_json() const {
        nlohmann::json d = nlohmann::json::object();
        for (const auto& [k, c] : details) {
            auto num = [](double v) -> nlohmann::json {
                if (std::isfinite(v)) return v;
                return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
            };
            nlohmann::json e = {{"lhs", num(c.lhs)}, {"rhs", num(c.rhs)}, {"ok", c.ok}};
            if (!c.note.empty()) e["note"] = c.note;
            d[k] = e;
        }
        return {{"question", to_string(question)}, {"outcome", to_string(outcome)}, {"theorem", theorem}, {"details", d}};
    }
};

// ---- exact comparisons ---------------------------------------------------------------

using Rational = boost::multiprecision::cpp_rational;

/// The decimal a double was written as (shortest round-trip form), as an exact rational.
inline Rational decimal_rational(double v) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "non-finite value in an exact comparison");
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific);
    const std::string s(buf, res.ptr);
    const auto e = s.find('e');
    std::string mant = s.substr(0, e);
    int exp10 = std::stoi(s.substr(e + 1));
    const bool neg = !mant.empty() && mant[0] == '-';
    if (neg) mant.erase(0, 1);
    const auto dot = mant.find('.');
    if (dot != std::string::npos) {
        exp10 -= static_cast<int>(mant.size() - dot - 1);
        mant.erase(dot, 1);
    }
    boost::multiprecision::cpp_int num(mant);
    boost::multiprecision::cpp_int ten = 1;
    for (int i = 0; i < std::abs(exp10); ++i) ten *= 10;
    Rational r = exp10 >= 0 ? Rational(num * ten) : Rational(num, ten);
    return neg ? Rational(-r) : r;
}

// ---- collar criteria ------------------------------------------------------------------

namespace detail {

inline std::string key(int j, const std::string& name) { return "c" + std::to_string(j) + ":" + name; }

inline void require_bounded(const CoefficientProfile& p, const char* what) {
    if (!p.domain.bounded() || p.domain.kind == DomainKind::HalfStrip)
        throw Error(ErrorCode::UnsupportedDomain, std::string(what) + " needs a bounded stock domain, got " +
                                                      to_string(p.domain.kind));
}

/// ESA at one collar: beta >= 2, or beta < 2 with D_- rho_- kappa^2 >= D_+ rho_+ (2 - beta)^2.
inline bool component_esa(const CoefficientProfile& p, const BoundaryComponent& c, std::map<std::string, Check>& out) {
    const Rational beta = decimal_rational(c.beta);
    if (beta >= 2) {
        out[key(c.id, "beta>=2")] = {c.beta, 2.0, true, ""};
        return true;
    }
    const Rational kappa = beta + decimal_rational(c.gamma) + (p.dim() - c.d_j - 2);
    const Rational lhs = decimal_rational(c.D_minus) * decimal_rational(c.rho_minus) * kappa * kappa;
    const Rational two_minus = Rational(2) - beta;
    const Rational rhs = decimal_rational(c.D_plus) * decimal_rational(c.rho_plus) * two_minus * two_minus;
    const bool ok = lhs >= rhs;
    const double ratio = static_cast<double>(Rational(lhs / rhs));
    if (!ok) out[key(c.id, "beta>=2")] = {c.beta, 2.0, false, ""};
    out[key(c.id, "hardy_ratio>=1")] = {ratio, 1.0, ok, "D-rho-(beta+gamma+d-d_j-2)^2 / (D+rho+(2-beta)^2)"};
    return ok;
}

/// Smallest L with rho(t) <= exp(L t^{1-beta/2}) (beta > 2) or rho(t) <= t^{-L} (beta = 2) on the collar.
inline double required_rho_constant(const BoundaryComponent& c) {
    double L = 0.0;
    const double top = std::min(detail::collar_depth(c), 0.5);
    for (int k = 0; k <= 600; ++k) {
        const double t = top * std::exp2(-0.1 * k);
        const double lr = std::log(c.rho(t));
        const double need = c.beta > 2.0 ? lr * std::pow(t, 0.5 * c.beta - 1.0) : lr / std::log(1.0 / t);
        L = std::max(L, need);
    }
    return L;
}

/// SC at one collar: beta >= 2 with the rho bound, or the product bound
/// a rho <= K t^{1+eta} (ln 1/t)^{1-eps}, eta = 1 - codim.
inline bool component_sc(const CoefficientProfile& p, const BoundaryComponent& c, std::map<std::string, Check>& out) {
    const Rational beta = decimal_rational(c.beta);
    if (beta >= 2) {
        const double L = required_rho_constant(c);
        const bool ok = std::isfinite(L);
        out[key(c.id, "beta>=2")] = {c.beta, 2.0, true, ""};
        out[key(c.id, "rho_bound")] = {L, kInf, ok,
                                       c.beta > 2.0 ? "rho <= exp(L t^{1-beta/2}) with L = lhs"
                                                    : "rho <= t^{-L} with L = lhs"};
        if (ok) {
            out.erase(key(c.id, "product_exponent"));
            return true;
        }
    }
    const Rational s = beta + decimal_rational(c.gamma);
    const int eta = 1 - (p.dim() - c.d_j);
    const Rational need = Rational(1 + eta);
    const bool ok = s >= need;
    std::string note;
    if (s == need) note = "log-margin: equality absorbed by (ln 1/t)^{1-eps}, eps = 1e-3";
    if (!ok && beta < 2) out[key(c.id, "beta>=2")] = {c.beta, 2.0, false, ""};
    out[key(c.id, "product_exponent")] = {c.beta + c.gamma, 1.0 + eta, ok, note};
    return ok;
}

inline Verdict collar_verdict(const CoefficientProfile& p, Question q) {
    Verdict v;
    v.question = q;
    v.theorem = q == Question::ESA ? "collar_esa" : "collar_sc";
    bool all = true;
    std::map<std::string, Check> passing, everything;
    for (const auto& c : p.components) {
        std::map<std::string, Check> mine;
        const bool ok = q == Question::ESA ? component_esa(p, c, mine) : component_sc(p, c, mine);
        all = all && ok;
        everything.insert(mine.begin(), mine.end());
        if (ok)
            for (const auto& [k, ch] : mine)
                if (ch.ok) passing[k] = ch;
    }
    v.outcome = all ? Outcome::Proven : Outcome::NotProven;
    v.details = all ? passing : everything;
    return v;
}

}  // namespace detail

/// ESA from the per-collar power-law rule on bounded domains.
inline Verdict classify_esa(const CoefficientProfile& p) {
    detail::require_bounded(p, "classify_esa");
    return detail::collar_verdict(p, Question::ESA);
}

/// SC from the per-collar power-law rule on bounded domains.
inline Verdict classify_sc(const CoefficientProfile& p) {
    detail::require_bounded(p, "classify_sc");
    return detail::collar_verdict(p, Question::SC);
}

/// Unbounded radial domains: the collar rule on the finite boundary plus
/// beta_inf <= 2 (both questions) and the growth bound on rho (SC).
inline Verdict classify_at_infinity(const CoefficientProfile& p, Question q) {
    const auto k = p.domain.kind;
    if (k != DomainKind::ExteriorDomain && k != DomainKind::PuncturedSpace)
        throw Error(ErrorCode::UnsupportedDomain,
                    std::string("classify_at_infinity needs an exterior domain or punctured space, got ") + to_string(k));
    if (!p.infinity) throw Error(ErrorCode::MissingInfinityRecord, "profile has no [infinity] record");
    Verdict v = detail::collar_verdict(p, q);
    v.theorem = q == Question::ESA ? "infinity_esa" : "infinity_sc";
    bool all = v.proven();
    const auto& inf = *p.infinity;
    std::map<std::string, Check> extra;
    const bool beta_ok = decimal_rational(inf.beta_inf) <= 2;
    extra["inf:beta<=2"] = {inf.beta_inf, 2.0, beta_ok, ""};
    all = all && beta_ok;
    if (k == DomainKind::ExteriorDomain) {
        const bool r_ok = inf.R_cut > 2.0 * p.domain.radius;
        extra["inf:R>2*radius"] = {inf.R_cut, 2.0 * p.domain.radius, r_ok, "boundary inside |x| < R/2"};
        all = all && r_ok;
    }
    if (q == Question::SC && beta_ok) {
        bool ok = true;
        double lhs = 0.0, rhs = 0.0;
        std::string note;
        if (inf.rho_growth == RhoGrowth::Power) {
            note = "rho <= |x|^L is within both growth bounds";
        } else if (inf.beta_inf < 2.0) {
            lhs = inf.kappa;
            rhs = 1.0 - 0.5 * inf.beta_inf;
            ok = decimal_rational(inf.kappa) <= Rational(1) - decimal_rational(inf.beta_inf) / 2;
            note = "rho <= exp(L |x|^kappa) needs kappa <= 1 - beta_inf/2";
        } else {
            lhs = inf.kappa;
            rhs = 0.0;
            ok = inf.kappa <= 0.0;
            note = "beta_inf = 2 needs polynomial growth: kappa <= 0";
        }
        extra["inf:rho_growth"] = {lhs, rhs, ok, note};
        all = all && ok;
    }
    if (all) {
        for (const auto& [kk, c] : extra) v.details[kk] = c;
        v.outcome = Outcome::Proven;
    } else {
        // report everything that was evaluated, failing entries included
        Verdict full = detail::collar_verdict(p, q);
        v.details = full.details;
        for (const auto& [kk, c] : extra) v.details[kk] = c;
        v.outcome = Outcome::NotProven;
    }
    return v;
}

// ---- metric criteria -----------------------------------------------------------------------

namespace detail {

// Deep samples t = nu1 2^{-m}: the barrier must beat |grad_M g|^2 = G'(delta_M)^2 by a margin
// that grows toward the boundary.
inline bool barrier_dominates(const CoefficientProfile& p, const BoundaryComponent& c, const HardyConstants& k,
                              const SigmaSpec& sigma, Check& out) {
    double worst_scaled = kInf, deepest = 0.0;
    for (int m = 10; m <= 40; ++m) {
        const double t = k.nu1 * std::ldexp(1.0, -m);
        const double H = hardy_barrier(p, c.id, t, k);
        const double dm = agmon_depth(c, t);
        const double g = std::isfinite(dm) ? sigma.dG(dm) : 0.0;
        const double diff = H - g * g;
        worst_scaled = std::min(worst_scaled, diff * std::pow(t, 2.0 - c.beta));
        deepest = diff;
    }
    out.lhs = worst_scaled;
    out.rhs = 0.0;
    out.ok = worst_scaled > 1e-9 && deepest >= 1.0;
    out.note = "min over t = nu1 2^-m (m = 10..40) of (H - G'(delta_M)^2) t^{2-beta}; H - G'^2 >= 1 at the deepest";
    return out.ok;
}

}  // namespace detail

/// ESA on the Agmon manifold: complete (branch i), or incomplete with Assumption (A),
/// a G satisfying the Sigma condition, and the form bound reduced to barrier dominance (branch ii).
inline Verdict classify_esa_metric(const CoefficientProfile& p, const std::optional<SigmaSpec>& sigma = std::nullopt) {
    Verdict v;
    v.question = Question::ESA;
    const auto mc = classify_manifold(p);
    if (mc.metric_case == MetricCase::C1_Complete) {
        v.theorem = "metric_esa:i";
        v.outcome = Outcome::Proven;
        v.details["complete"] = {1.0, 1.0, true, to_string(mc.metric_case)};
        return v;
    }
    v.theorem = "metric_esa:ii";
    v.outcome = Outcome::Inconclusive;
    v.details["complete"] = {0.0, 1.0, false, to_string(mc.metric_case)};
    const auto A = check_assumption_A(p);
    v.details["assumption_A"] = {A.holds() ? 1.0 : 0.0, 1.0, A.holds(), A.witness};
    if (!sigma) {
        v.details["sigma"] = {0.0, 1.0, false, "no G supplied"};
        return v;
    }
    const auto st = sigma_check(*sigma);
    v.details["sigma"] = {st == SigmaStatus::Satisfied ? 1.0 : 0.0, 1.0, st == SigmaStatus::Satisfied,
                          sigma->name() + ": " + to_string(st)};
    if (!A.holds() || st != SigmaStatus::Satisfied) return v;
    bool all = true;
    for (const auto& c : p.components) {
        if (mc.per_component_complete.at(c.id)) continue;
        Check ch;
        try {
            const auto k = hardy_constants(p, c.id);
            all = detail::barrier_dominates(p, c, k, *sigma, ch) && all;
        } catch (const Error& e) {
            ch = {0.0, 0.0, false, e.what()};
            all = false;
        }
        v.details[detail::key(c.id, "barrier_dominance")] = ch;
    }
    if (all) {
        v.outcome = Outcome::Proven;
        v.details.erase("complete");
    }
    return v;
}

/// rho = omega * rho_tilde with rho_tilde in L^1(rho dx); r_k = r1 2^{1-k}, R_k = k.
struct WeightSplit {
    std::function<double(const Point&)> omega;
    std::function<double(const Point&)> rho_tilde;
    double alpha = 0.0;
    double r1 = 0.0;  // 0: half the smallest incomplete collar depth in the metric
};

namespace detail {

struct AxisSample {
    Point x;
    double d_M = 0.0;      // from the reference point, along the ray
    double delta_M = 0.0;  // to the boundary
};

// Radial rays (several directions) from a reference point, graded toward every boundary
// end and, on unbounded domains, outward.
inline std::vector<AxisSample> axis_samples(const CoefficientProfile& p, double delta_floor) {
    const auto& dom = p.domain;
    double r0 = 0.0, lo = 0.0, hi = 0.0;
    bool lo_boundary = false, hi_boundary = false;
    switch (dom.kind) {
        case DomainKind::IntervalNormalModel: r0 = 0.5 * dom.length, lo = 0.0, hi = dom.length, lo_boundary = true; break;
        case DomainKind::Ball: r0 = 0.0, lo = 0.0, hi = dom.radius, hi_boundary = true; break;
        case DomainKind::Annulus:
            r0 = 0.5 * (dom.r_in + dom.r_out), lo = dom.r_in, hi = dom.r_out, lo_boundary = hi_boundary = true;
            break;
        case DomainKind::PuncturedBall: r0 = 0.5 * dom.radius, lo = 0.0, hi = dom.radius, lo_boundary = hi_boundary = true; break;
        case DomainKind::ExteriorDomain: r0 = 2.0 * dom.radius, lo = dom.radius, hi = kInf, lo_boundary = true; break;
        case DomainKind::PuncturedSpace: r0 = 1.0, lo = 0.0, hi = kInf, lo_boundary = true; break;
        case DomainKind::HalfStrip: throw Error(ErrorCode::UnsupportedDomain, "no radial rays on the half strip");
    }
    auto at = [&](double r) {
        Point x = Point::Zero(dom.dim);
        x[0] = r;
        return x;
    };
    auto slow = [&](double r) { return 1.0 / std::sqrt(evaluate_scale(p, at(r))); };
    std::vector<double> radii;
    auto toward = [&](double end, double sign) {
        // r = end + sign * t, t from |r0 - end| down geometrically
        const double span = std::abs(r0 - end);
        for (int m = 1; m < 16 * 1000; ++m) {
            const double t = span * std::exp2(-m / 16.0);
            const double r = end + sign * t;
            if (t < 1e-290 || r == end || std::abs(r - end) < 0.5 * t) break;  // depth no longer representable
            radii.push_back(r);
            if (m % 16 == 0 && agmon_boundary_distance(p, at(end + sign * t)) < delta_floor) break;
        }
    };
    radii.push_back(r0);
    if (hi_boundary) toward(hi, -1.0);
    if (lo_boundary && lo > 0.0) toward(lo, 1.0);
    if (lo_boundary && lo == 0.0) toward(0.0, 1.0);
    if (!std::isfinite(hi))
        for (int m = 1; m <= 16 * 40; ++m) radii.push_back(r0 * std::exp2(m / 16.0));
    if (dom.kind == DomainKind::Ball)
        for (int m = 1; m <= 64; ++m) radii.push_back(-dom.radius * m / 65.0);  // the centre side is not special
    std::sort(radii.begin(), radii.end());
    radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
    // d_M along the ray by cumulative quadrature from r0
    std::vector<double> dm(radii.size(), 0.0);
    const auto i0 = static_cast<std::size_t>(std::find(radii.begin(), radii.end(), r0) - radii.begin());
    for (std::size_t i = i0 + 1; i < radii.size(); ++i)
        dm[i] = dm[i - 1] + elem_rule::integrate(slow, radii[i - 1], radii[i]);
    for (std::size_t i = i0; i-- > 0;) dm[i] = dm[i + 1] + elem_rule::integrate(slow, radii[i], radii[i + 1]);
    // several directions: profiles are radial, omega need not be
    const int dirs = dom.dim == 1 ? 1 : 8;
    std::vector<AxisSample> out;
    out.reserve(radii.size() * dirs);
    for (std::size_t i = 0; i < radii.size(); ++i) {
        const double r = radii[i];
        if (dom.kind == DomainKind::PuncturedBall || dom.kind == DomainKind::PuncturedSpace)
            if (r <= 0.0) continue;
        Point base = at(r);
        const double dM = agmon_boundary_distance(p, base);
        for (int k = 0; k < dirs; ++k) {
            Point x = base;
            if (dom.dim >= 2) {
                const double th = 2.0 * std::numbers::pi * k / dirs;
                x[0] = r * std::cos(th);
                x[1] = r * std::sin(th);
            }
            out.push_back({x, dm[i], dM});
        }
    }
    return out;
}

}  // namespace detail

/// SC on the Agmon manifold with a weight split rho = omega * rho_tilde.
inline Verdict classify_sc_metric(const CoefficientProfile& p, const WeightSplit& split) {
    Verdict v;
    v.question = Question::SC;
    if (!split.omega || !split.rho_tilde) throw Error(ErrorCode::InvalidSplit, "omega and rho_tilde are required");
    const auto mc = classify_manifold(p);
    const auto A = check_assumption_A(p);
    if (p.domain.kind == DomainKind::HalfStrip) {
        v.theorem = "metric_sc";
        v.outcome = Outcome::Inconclusive;
        v.details["assumption_A"] = {0.0, 1.0, A.holds(), A.witness};
        return v;
    }
    // invariants: omega * rho_tilde = rho on samples, rho_tilde in L^1(rho dx) along every collar
    for (const auto& c : p.components) {
        const double top = 0.5 * std::min(p.domain.reach(c.id), 1.0);
        for (int m = 0; m <= 160; ++m) {
            const double t = top * std::exp2(-0.25 * m);
            const Point x = point_at_depth(p.domain, c.id, t);
            const double rho = evaluate_weight(p, x);
            const double prod = split.omega(x) * split.rho_tilde(x);
            if (!(std::abs(prod - rho) <= 1e-10 * std::abs(rho)))
                throw Error(ErrorCode::InvalidSplit, "omega * rho_tilde != rho at depth " + std::to_string(t) +
                                                         " of component " + std::to_string(c.id));
        }
        const auto l1 = dyadic_integral_from_zero(
            [&](double t) {
                const Point x = point_at_depth(p.domain, c.id, t);
                return split.rho_tilde(x) * evaluate_weight(p, x) * normal_jacobian(p.domain, c.id, t);
            },
            top, 36);  // points deeper than ~1e-12 are not representable near curved components
        if (l1.divergent())
            throw Error(ErrorCode::InvalidSplit, "rho_tilde is not integrable against rho near component " +
                                                     std::to_string(c.id));
    }
    // r_k sequence
    double r1 = split.r1;
    if (!(r1 > 0.0)) {
        r1 = kInf;
        for (const auto& c : p.components)
            if (!mc.per_component_complete.at(c.id)) r1 = std::min(r1, 0.5 * agmon_depth(c, detail::collar_depth(c)));
        if (!std::isfinite(r1)) r1 = 0.5;
    }
    const auto samples = detail::axis_samples(p, r1 * std::ldexp(1.0, -61));
    // number of metric annuli resolved by representable sample points (at most 60)
    double delta_min = kInf;
    for (const auto& s : samples) delta_min = std::min(delta_min, s.delta_M);
    const int N = std::min(60, static_cast<int>(std::floor(std::log2(r1 / delta_min))) - 1);

    auto shell_condition = [&](Check& ch) {
        // omega_{k,inf} = sup over R_k <= d_M <= R_{k+1} with R_k = k
        double worst = -kInf;
        int shells = 0;
        for (int k = 1; k <= 40; ++k) {
            double sup = -kInf;
            for (const auto& s : samples)
                if (s.d_M >= k && s.d_M <= k + 1) sup = std::max(sup, split.omega(s.x));
            if (sup == -kInf) continue;
            ++shells;
            worst = std::max(worst, std::log(sup) - split.alpha * k);
        }
        ch = {worst, 0.0, shells > 0 && worst <= 1e-12,
              "max over shells k of ln(omega_{k,inf}) - alpha R_k (" + std::to_string(shells) + " shells sampled)"};
        return ch.ok;
    };
    auto series_condition = [&](Check& ch) {
        if (N < 16) {
            ch = {0.0, 0.0, false, "fewer than 16 metric annuli resolvable in double precision"};
            return Convergence::Inconclusive;
        }
        std::vector<double> terms;
        for (int k = 1; k <= N; ++k) {
            const double rk = r1 * std::ldexp(1.0, 1 - k), rk1 = 0.5 * rk;
            double sup = -kInf;
            for (const auto& s : samples)
                if (s.delta_M >= rk1 && s.delta_M <= rk) sup = std::max(sup, split.omega(s.x));
            if (sup == -kInf) {
                ch = {0.0, 0.0, false, "no samples in the metric annulus k = " + std::to_string(k)};
                return Convergence::Inconclusive;
            }
            terms.push_back((rk - rk1) * (rk - rk1) / sup);
        }
        const auto t = classify_series(terms);
        ch = {t.partial_sum, kInf, t.verdict == Convergence::Divergent,
              std::string("sum (r_k - r_{k+1})^2 / omega_k over ") + std::to_string(N) + " annuli: " + to_string(t.verdict)};
        return t.verdict;
    };

    if (mc.metric_case == MetricCase::C1_Complete) {
        v.theorem = "metric_sc:i";
        Check ch;
        const bool ok = shell_condition(ch);
        v.details["complete"] = {1.0, 1.0, true, ""};
        v.details["omega_shell_growth"] = ch;
        v.outcome = ok ? Outcome::Proven : Outcome::NotProven;
        return v;
    }
    const bool finite_diam = mc.metric_case == MetricCase::C2_IncompleteFiniteDiam;
    v.theorem = finite_diam ? "metric_sc:ii" : "metric_sc:iii";
    v.details["assumption_A"] = {A.holds() ? 1.0 : 0.0, 1.0, A.holds(), A.witness};
    v.details["diam"] = {mc.diam_estimate, kInf, finite_diam, finite_diam ? "upper bound" : "infinite"};
    v.details["diam"].ok = true;  // the branch is chosen by the diameter
    if (A.status == TriState::Unknown) {
        v.outcome = Outcome::Inconclusive;
        return v;
    }
    Check series;
    const auto sv = series_condition(series);
    v.details["omega_annulus_series"] = series;
    bool ok = A.holds() && series.ok;
    bool inconclusive = sv == Convergence::Inconclusive;
    if (!finite_diam) {
        Check shells;
        ok = shell_condition(shells) && ok;
        v.details["omega_shell_growth"] = shells;
    }
    v.outcome = ok ? Outcome::Proven : (inconclusive ? Outcome::Inconclusive : Outcome::NotProven);
    return v;
}

}  // namespace confine
