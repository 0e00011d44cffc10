#pragma once

// Agmon metric ds^2 = a(x)^{-1} |dx|^2 of M = (Omega, D^{-1}): boundary and
// point distances, completeness cases, Assumption (A), and a fast-marching
// eikonal solver for d = 2.

#include <cmath>
#include <fstream>
#include <map>
#include <queue>
#include <sstream>
#include <string>
#include <vector>

#include "profiles.hpp"

namespace confine {

// ---- radial integrals --------------------------------------------------------

/// ∫_0^t a(s)^{-1/2} ds for one component (+inf when the singularity is not integrable).
inline double agmon_depth(const BoundaryComponent& c, double t) {
    if (t <= 0.0) return 0.0;
    const auto v = law_integral_from_zero(c.a, -0.5, t);
    return v ? *v : kInf;
}

/// ∫_lo^hi a(s)^{-1/2} ds for one component, lo > 0.
inline double agmon_length(const BoundaryComponent& c, double lo, double hi) {
    if (hi <= lo) return 0.0;
    return law_integral(c.a, -0.5, lo, hi);
}

/// Whether the metric is complete toward component c: ∫_0 a^{-1/2} = ∞.
inline bool component_complete(const BoundaryComponent& c) {
    if (const auto& lead = c.a.leading(); lead && c.a.exact_depth() > 0.0) return lead->exponent >= 2.0;
    return !law_integral_from_zero(c.a, -0.5, std::min(c.nu0, 0.5)).has_value();
}

namespace detail {
// a along a radial line at radius r for unbounded radial domains, including the far-field factor.
inline double radial_scale(const CoefficientProfile& p, double r) {
    Point x = Point::Zero(p.dim());
    x[0] = r;
    return evaluate_scale(p, x);
}
}  // namespace detail

/// Metric distance from x to infinity, for unbounded radial domains (+inf when complete there).
inline double agmon_distance_to_infinity(const CoefficientProfile& p, const Point& x) {
    if (p.domain.bounded() || p.domain.kind == DomainKind::HalfStrip) return kInf;
    const double beta_inf = p.infinity ? p.infinity->beta_inf : 0.0;
    if (beta_inf <= 2.0) return kInf;
    const double R = p.infinity->R_cut;
    const auto& c = p.components.front();
    const double r0 = x.norm();
    const double rb = p.domain.kind == DomainKind::ExteriorDomain ? p.domain.radius : 0.0;
    const double tail_start = std::max({2.0 * R, rb + c.nu0, r0});
    double near = 0.0;
    if (r0 < tail_start)
        near = integrate([&](double r) { return 1.0 / std::sqrt(detail::radial_scale(p, r)); }, r0, tail_start, 1e-10);
    // beyond tail_start the scale is exactly (r/R)^beta_inf
    const double e = 1.0 - 0.5 * beta_inf;
    const double tail = -std::pow(R, 0.5 * beta_inf) * std::pow(tail_start, e) / e;
    return near + tail;
}

/// Agmon distance to the boundary (min over components, and infinity when it is
/// at finite distance). Paths run along normal rays, which are straight segments
/// through the regions of the successive nearest components.
inline double agmon_boundary_distance(const CoefficientProfile& p, const Point& x) {
    const auto bd = boundary_distance(p.domain, x);
    const auto& dom = p.domain;
    const auto& near = p.component(bd.component);
    double best = agmon_depth(near, bd.delta);
    if (dom.component_count() == 2) {
        const int other = 1 - bd.component;
        const double mid = dom.reach(bd.component);
        const double via = agmon_length(near, bd.delta, mid) + agmon_depth(p.component(other), mid);
        best = std::min(best, via);
    }
    return std::min(best, agmon_distance_to_infinity(p, x));
}

// ---- completeness ------------------------------------------------------------

enum class MetricCase { C1_Complete, C2_IncompleteFiniteDiam, C3_IncompleteInfiniteDiam };

inline const char* to_string(MetricCase c) {
    switch (c) {
        case MetricCase::C1_Complete: return "C1_Complete";
        case MetricCase::C2_IncompleteFiniteDiam: return "C2_IncompleteFiniteDiam";
        case MetricCase::C3_IncompleteInfiniteDiam: return "C3_IncompleteInfiniteDiam";
    }
    return "?";
}

struct MetricClassification {
    MetricCase metric_case = MetricCase::C1_Complete;
    std::map<int, bool> per_component_complete;
    std::optional<bool> infinity_complete;  // set for unbounded domains
    double diam_estimate = kInf;            // an upper bound on diam(M)
};

inline MetricClassification classify_manifold(const CoefficientProfile& p) {
    MetricClassification out;
    bool all = true;
    for (const auto& c : p.components) {
        const bool ok = component_complete(c);
        out.per_component_complete[c.id] = ok;
        all = all && ok;
    }
    const auto& dom = p.domain;
    const bool radial_unbounded = dom.kind == DomainKind::ExteriorDomain || dom.kind == DomainKind::PuncturedSpace;
    if (radial_unbounded) {
        const double beta_inf = p.infinity ? p.infinity->beta_inf : 0.0;
        out.infinity_complete = beta_inf <= 2.0;
        all = all && *out.infinity_complete;
    }
    const bool any_complete = std::any_of(out.per_component_complete.begin(), out.per_component_complete.end(),
                                          [](auto& kv) { return kv.second; }) ||
                              (out.infinity_complete && *out.infinity_complete);
    if (all) {
        out.metric_case = MetricCase::C1_Complete;
        out.diam_estimate = kInf;
        return out;
    }
    if (any_complete) {
        out.metric_case = MetricCase::C3_IncompleteInfiniteDiam;
        out.diam_estimate = kInf;
        return out;
    }
    double diam = kInf;
    switch (dom.kind) {
        case DomainKind::IntervalNormalModel: diam = agmon_depth(p.component(0), dom.length); break;
        case DomainKind::Ball: diam = 2.0 * agmon_depth(p.component(0), dom.radius); break;
        case DomainKind::Annulus: {
            // out to the middle circle, half way round it, back down
            const double w = 0.5 * (dom.r_out - dom.r_in);
            const double rmid = 0.5 * (dom.r_in + dom.r_out);
            const double up = std::max(agmon_depth(p.component(0), w), agmon_depth(p.component(1), w));
            Point xm = Point::Zero(dom.dim);
            xm[0] = rmid;
            diam = 2.0 * up + std::numbers::pi * rmid / std::sqrt(evaluate_scale(p, xm));
            break;
        }
        case DomainKind::PuncturedBall: {
            const double half = 0.5 * dom.radius;
            diam = 2.0 * (agmon_depth(p.component(0), half) + agmon_depth(p.component(1), half));
            break;
        }
        case DomainKind::HalfStrip: {
            // any point reaches the boundary, runs along it for free, and comes back
            const double H = 0.5 * dom.width;
            diam = 4.0 * agmon_depth(p.component(0), H);
            break;
        }
        case DomainKind::ExteriorDomain:
        case DomainKind::PuncturedSpace: {
            const auto& c = p.components.front();
            const double to_inf = agmon_distance_to_infinity(p, point_at_depth(dom, 0, c.nu0)) +
                                  agmon_depth(c, c.nu0);
            diam = 2.0 * to_inf;
            break;
        }
    }
    out.diam_estimate = diam;
    out.metric_case = std::isfinite(diam) ? MetricCase::C2_IncompleteFiniteDiam : MetricCase::C3_IncompleteInfiniteDiam;
    return out;
}

// ---- Assumption (A) ------------------------------------------------------------

enum class TriState { Holds, Fails, Unknown };

inline const char* to_string(TriState t) {
    switch (t) {
        case TriState::Holds: return "Holds";
        case TriState::Fails: return "Fails";
        case TriState::Unknown: return "Unknown";
    }
    return "?";
}

struct AssumptionA {
    TriState status = TriState::Unknown;
    std::string witness;
    bool holds() const { return status == TriState::Holds; }
};

/// Compactness of S_{r,R} = {delta_M >= r, d_M(x, x0) <= R}.
inline AssumptionA check_assumption_A(const CoefficientProfile& p) {
    const auto& dom = p.domain;
    if (dom.bounded()) {
        return {TriState::Holds, "bounded domain, coefficients continuous and positive inside: "
                                 "delta_M >= r keeps S_r away from incomplete components, d_M <= R from complete ones"};
    }
    if (dom.kind == DomainKind::ExteriorDomain || dom.kind == DomainKind::PuncturedSpace) {
        return {TriState::Holds, "radial unbounded domain: |x| is bounded on S_{r,R} by d_M <= R when infinity is "
                                 "complete and by delta_M >= r when it is not"};
    }
    // half strip: coefficients do not depend on x_1
    bool unknown = false;
    for (const auto& c : p.components) {
        const auto& lead = c.a.leading();
        if (!lead) {
            unknown = true;
            continue;
        }
        if (lead->exponent < 0.0) {
            const double H = 0.5 * dom.width;
            Point origin = Point::Zero(2);
            const double r0 = agmon_boundary_distance(p, origin);
            std::ostringstream w;
            w << "midline {x_2 = 0}: delta_M = " << r0 << " there, and a -> inf at component " << c.id
              << " makes travel along the boundary free, so d_M(x, 0) <= " << 2.0 * agmon_depth(c, H)
              << " for every x; S_r contains the whole unbounded midline for r <= " << r0;
            return {TriState::Fails, w.str()};
        }
    }
    if (unknown) return {TriState::Unknown, "custom law without leading behaviour; no analytic rule"};
    return {TriState::Holds, "a bounded near both lines: lateral travel costs at least c |dx_1|, so d_M <= R bounds x_1"};
}

// ---- curvature constant ----------------------------------------------------------

/// Sampled sup over depths t in [t_min, nu] of |Δδ - (d - d_j - 1)/δ|, with Δδ from
/// central finite differences of boundary_distance.
inline double estimate_curvature_constant(const CoefficientProfile& p, int j, double nu, double t_min = 1e-4,
                                          int samples = 64) {
    const auto& dom = p.domain;
    const int d = dom.dim;
    const double flat = d - dom.component_dim(j) - 1;
    double worst = 0.0;
    for (int k = 0; k < samples; ++k) {
        const double t = t_min * std::pow(nu / t_min, static_cast<double>(k) / (samples - 1));
        if (t >= dom.reach(j)) continue;
        const Point x = point_at_depth(dom, j, t);
        const double step = std::min(0.05 * t, 1e-4);  // roundoff-limited below ~1e-5
        double lap = 0.0;
        const double f0 = boundary_distance(dom, x).delta;
        for (int i = 0; i < d; ++i) {
            Point xp = x, xm = x;
            xp[i] += step;
            xm[i] -= step;
            lap += (boundary_distance(dom, xp).delta - 2.0 * f0 + boundary_distance(dom, xm).delta) / (step * step);
        }
        worst = std::max(worst, std::abs(lap - flat / t));
    }
    return worst;
}

// ---- fast marching ----------------------------------------------------------------

struct ToBoundary {};
struct ToPoint {
    Point x0;
};

struct DistanceField {
    int nx = 0, ny = 0;
    double x_min = 0, y_min = 0, h = 0;
    std::vector<double> values;  // NaN outside Omega
    std::vector<char> inside;
    bool to_boundary = true;
    Point seed;                // for ToPoint
    bool divergent = false;    // ToBoundary with an infinitely distant component
    double cutoff = 0.0;       // depth at which the divergent boundary data were cut

    std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }
    double x(int i) const { return x_min + i * h; }
    double y(int j) const { return y_min + j * h; }
    double at(int i, int j) const { return values[index(i, j)]; }

    void write_csv(std::ostream& os) const {
        os << "x,y,u\n";
        os.precision(10);
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i)
                if (inside[index(i, j)]) os << x(i) << ',' << y(j) << ',' << at(i, j) << '\n';
    }
    void write_csv(const std::string& path) const {
        std::ofstream os(path);
        if (!os) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
        write_csv(os);
    }
};

namespace detail {

inline bool inside_domain(const DomainSpec& dom, const Point& x) {
    try {
        boundary_distance(dom, x);
        return true;
    } catch (const Error&) {
        return false;
    }
}

/// Tabulated normal integral Phi(t) = ∫_eps^t a_j^{-1/2} of one component and
/// its inverse. eps = 0 for incomplete components.
class NormalMap {
public:
    NormalMap() = default;
    NormalMap(const BoundaryComponent& c, double eps, double t_max) : eps_(eps), slow_(c.a) {
        const double t_lo = eps > 0 ? eps : 1e-14 * t_max;
        const int n = 40000;
        t_.resize(n);
        phi_.resize(n);
        const double q = std::log(t_max / t_lo) / (n - 1);
        for (int k = 0; k < n; ++k) t_[k] = t_lo * std::exp(q * k);
        t_.back() = t_max;
        phi_[0] = eps > 0 ? 0.0 : agmon_depth(c, t_lo);
        auto f = [&](double t) { return 1.0 / std::sqrt(c.a(t)); };
        for (int k = 1; k < n; ++k) {
            const double a = t_[k - 1], b = t_[k];
            phi_[k] = phi_[k - 1] + (b - a) * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b)) / 6.0;
        }
        // below the table Phi follows the leading power (or is linear if there is none)
        const auto& lead = c.a.leading();
        lead_exp_ = lead ? 1.0 - 0.5 * lead->exponent : 1.0;
    }

    double phi(double t) const {
        if (t <= t_.front()) {
            if (eps_ > 0) return -(t_.front() - t) * slowness(t_.front());
            return phi_.front() * std::pow(std::max(t, 0.0) / t_.front(), lead_exp_);
        }
        if (t >= t_.back()) return phi_.back() + (t - t_.back()) * slowness(t_.back());
        const auto it = std::upper_bound(t_.begin(), t_.end(), t);
        const std::size_t k = static_cast<std::size_t>(it - t_.begin());
        const double w = std::log(t / t_[k - 1]) / std::log(t_[k] / t_[k - 1]);
        return (1.0 - w) * phi_[k - 1] + w * phi_[k];
    }

    double inverse(double u) const {
        if (u <= phi_.front()) {
            if (eps_ > 0) return t_.front() + (u - phi_.front()) / slowness(t_.front());
            return phi_.front() > 0 ? t_.front() * std::pow(std::max(u, 0.0) / phi_.front(), 1.0 / lead_exp_) : 0.0;
        }
        if (u >= phi_.back()) return t_.back() + (u - phi_.back()) / slowness(t_.back());
        const auto it = std::upper_bound(phi_.begin(), phi_.end(), u);
        const std::size_t k = static_cast<std::size_t>(it - phi_.begin());
        const double w = (u - phi_[k - 1]) / (phi_[k] - phi_[k - 1]);
        return t_[k - 1] * std::pow(t_[k] / t_[k - 1], w);
    }

    double slowness(double t) const { return 1.0 / std::sqrt(slow_(t)); }

private:
    double eps_ = 0.0;
    double lead_exp_ = 1.0;
    ScalarLaw slow_;
    std::vector<double> t_, phi_;
};

}  // namespace detail

/// Fast marching for |∇u| = a^{-1/2} on a square lattice of spacing h, with the
/// 4-neighbour upwind quadratic update.
///
/// ToBoundary: u behaves like Phi_j(delta) near component j, which is singular
/// (a square root for a = delta), and a first-order update on u itself loses
/// O(1) relative accuracy next to the boundary at every h. Each update is
/// therefore done on s = Phi_j^{-1}(u), which solves |∇s| = f(x) / f_j(s) with
/// f_j = a_j^{-1/2} and is as smooth as a Euclidean distance. Boundary-adjacent
/// nodes are initialised with the exact normal integral; components with a
/// divergent normal integral are cut at depth h/2 and the field is flagged.
template <class Kind>
DistanceField eikonal_solve(const CoefficientProfile& p, double h, const Kind& kind) {
    const auto& dom = p.domain;
    if (dom.dim != 2) throw Error(ErrorCode::UnsupportedDomain, "eikonal solver needs d = 2");
    if (!(h > 0)) throw Error(ErrorCode::InvalidArgument, "h must be positive");
    double half = 0.0;
    switch (dom.kind) {
        case DomainKind::Ball:
        case DomainKind::PuncturedBall: half = dom.radius; break;
        case DomainKind::Annulus: half = dom.r_out; break;
        default: throw Error(ErrorCode::UnsupportedDomain, "eikonal solver supports bounded radial domains");
    }
    for (const auto& c : p.components)
        if (c.nu0 / h < 8.0)
            throw Error(ErrorCode::GridTooCoarse, "collar of component " + std::to_string(c.id) + " has " +
                                                      std::to_string(c.nu0 / h) + " < 8 cells");

    DistanceField F;
    F.h = h;
    F.nx = F.ny = 2 * static_cast<int>(std::ceil(half / h)) + 1;
    F.x_min = F.y_min = -h * ((F.nx - 1) / 2);
    const std::size_t n = static_cast<std::size_t>(F.nx) * F.ny;
    F.values.assign(n, std::numeric_limits<double>::quiet_NaN());
    F.inside.assign(n, 0);
    std::vector<double> fnode(n, 0.0);
    std::vector<int> comp(n, 0);
    std::vector<double> dist(n, 0.0);
    for (int j = 0; j < F.ny; ++j)
        for (int i = 0; i < F.nx; ++i) {
            Point x(2);
            x << F.x(i), F.y(j);
            if (detail::inside_domain(dom, x)) {
                const auto id = F.index(i, j);
                F.inside[id] = 1;
                fnode[id] = 1.0 / std::sqrt(evaluate_scale(p, x));
                const auto bd = boundary_distance(dom, x);
                comp[id] = bd.component;
                dist[id] = bd.delta;
            }
        }

    constexpr bool to_boundary = std::is_same_v<Kind, ToBoundary>;
    std::vector<detail::NormalMap> maps;
    if constexpr (to_boundary) {
        for (const auto& c : p.components) {
            const bool complete = component_complete(c);
            if (complete) {
                F.divergent = true;
                F.cutoff = 0.5 * h;
            }
            maps.emplace_back(c, complete ? 0.5 * h : 0.0, 2.0 * half);
        }
    }

    enum : char { Far, Trial, Known };
    std::vector<char> state(n, Far);
    std::vector<double> u(n, kInf);
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};

    if constexpr (to_boundary) {
        F.to_boundary = true;
        for (int j = 0; j < F.ny; ++j)
            for (int i = 0; i < F.nx; ++i) {
                const auto id = F.index(i, j);
                if (!F.inside[id]) continue;
                bool band = false;
                for (int k = 0; k < 4; ++k) {
                    const int ii = i + di[k], jj = j + dj[k];
                    if (ii < 0 || jj < 0 || ii >= F.nx || jj >= F.ny || !F.inside[F.index(ii, jj)]) band = true;
                }
                if (!band) continue;
                Point x(2);
                x << F.x(i), F.y(j);
                const auto bd = boundary_distance(dom, x);
                u[id] = maps[static_cast<std::size_t>(bd.component)].phi(bd.delta);
                state[id] = Trial;
                heap.push({u[id], id});
            }
    } else {
        F.to_boundary = false;
        F.seed = kind.x0;
        const int i0 = static_cast<int>(std::lround((kind.x0[0] - F.x_min) / h));
        const int j0 = static_cast<int>(std::lround((kind.x0[1] - F.y_min) / h));
        if (i0 < 0 || j0 < 0 || i0 >= F.nx || j0 >= F.ny || !F.inside[F.index(i0, j0)])
            throw Error(ErrorCode::PointOutsideDomain, "seed point is not at an interior node");
        const double f0 = 1.0 / std::sqrt(evaluate_scale(p, kind.x0));
        for (int k = -1; k < 4; ++k) {
            const int ii = k < 0 ? i0 : i0 + di[k], jj = k < 0 ? j0 : j0 + dj[k];
            if (ii < 0 || jj < 0 || ii >= F.nx || jj >= F.ny) continue;
            const auto id = F.index(ii, jj);
            if (!F.inside[id]) continue;
            Point x(2);
            x << F.x(ii), F.y(jj);
            u[id] = (x - kind.x0).norm() * 0.5 * (fnode[id] + f0);
            state[id] = Trial;
            heap.push({u[id], id});
        }
    }

    auto update = [&](int i, int j) {
        const auto id = F.index(i, j);
        const detail::NormalMap* map = to_boundary ? &maps[static_cast<std::size_t>(comp[id])] : nullptr;
        auto to_s = [&](double v) { return map ? map->inverse(v) : v; };
        double a = kInf, b = kInf;
        for (int s : {-1, 1}) {
            const int ii = i + s, jj = j + s;
            if (ii >= 0 && ii < F.nx && state[F.index(ii, j)] == Known) a = std::min(a, u[F.index(ii, j)]);
            if (jj >= 0 && jj < F.ny && state[F.index(i, jj)] == Known) b = std::min(b, u[F.index(i, jj)]);
        }
        const double sa = std::isfinite(a) ? to_s(a) : kInf, sb = std::isfinite(b) ? to_s(b) : kInf;
        // g depends on s itself; iterate from the node's Euclidean depth
        double s = map ? dist[id] : std::min(sa, sb);
        for (int iter = 0; iter < 60; ++iter) {
            const double g = map ? fnode[id] / map->slowness(std::max(s, 1e-300)) : fnode[id];
            const double gh = g * h;
            double next;
            if (std::isfinite(sa) && std::isfinite(sb) && std::abs(sa - sb) < gh)
                next = 0.5 * (sa + sb + std::sqrt(2.0 * gh * gh - (sa - sb) * (sa - sb)));
            else
                next = std::min(sa, sb) + gh;
            const bool done = std::abs(next - s) <= 1e-13 * std::max(1.0, std::abs(next));
            s = next;
            if (!map || done) break;
        }
        const double val = map ? map->phi(s) : s;
        if (val < u[id]) {
            u[id] = val;
            state[id] = Trial;
            heap.push({val, id});
        }
    };

    while (!heap.empty()) {
        const auto [v, id] = heap.top();
        heap.pop();
        if (state[id] == Known || v > u[id]) continue;
        state[id] = Known;
        const int i = static_cast<int>(id % F.nx), j = static_cast<int>(id / F.nx);
        for (int k = 0; k < 4; ++k) {
            const int ii = i + di[k], jj = j + dj[k];
            if (ii < 0 || jj < 0 || ii >= F.nx || jj >= F.ny) continue;
            const auto nid = F.index(ii, jj);
            if (!F.inside[nid] || state[nid] == Known) continue;
            update(ii, jj);
        }
    }
    for (std::size_t k = 0; k < n; ++k)
        if (F.inside[k]) F.values[k] = u[k];
    return F;
}

/// max over lattice edges of |u(p) - u(q)| / (h max(f(p), f(q))); the discrete
/// 1-Lipschitz property asks for 1 + O(h).
inline double max_lipschitz_ratio(const DistanceField& F, const CoefficientProfile& p) {
    double worst = 0.0;
    auto f = [&](int i, int j) {
        Point x(2);
        x << F.x(i), F.y(j);
        return 1.0 / std::sqrt(evaluate_scale(p, x));
    };
    for (int j = 0; j < F.ny; ++j)
        for (int i = 0; i < F.nx; ++i) {
            if (!F.inside[F.index(i, j)]) continue;
            for (auto [ii, jj] : {std::pair{i + 1, j}, std::pair{i, j + 1}}) {
                if (ii >= F.nx || jj >= F.ny || !F.inside[F.index(ii, jj)]) continue;
                const double du = std::abs(F.at(i, j) - F.at(ii, jj));
                worst = std::max(worst, du / (F.h * std::max(f(i, j), f(ii, jj))));
            }
        }
    return worst;
}

}  // namespace confine
