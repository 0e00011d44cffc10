#pragma once

// Discrete weighted quadratic forms on graded 1D grids (normal or radial
// reductions u -> -(1/w)(p u')' + V u): the localization identity, the basic
// inequality, the Hardy barrier with its constants, and the vector-field bound.

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "geometry.hpp"
#include "sigma.hpp"
#include "sturm.hpp"

namespace confine {

// ---- grids ---------------------------------------------------------------------------

/// Nodes c 2^{-k/n}, k = 0..levels*n, in increasing order.
struct Grid1D {
    std::vector<double> nodes;
    double c = 1.0;
    int per_level = 8;
    int levels = 0;

    std::size_t size() const { return nodes.size(); }
    double t_min() const { return nodes.front(); }
    /// Relative spacing (t_{i+1} - t_i) / t_i.
    double h() const { return std::exp2(1.0 / per_level) - 1.0; }
    /// Element containing t (clamped).
    std::size_t element(double t) const {
        auto it = std::upper_bound(nodes.begin(), nodes.end(), t);
        std::size_t i = it == nodes.begin() ? 0 : static_cast<std::size_t>(it - nodes.begin()) - 1;
        return std::min(i, nodes.size() - 2);
    }
};

inline Grid1D graded_grid(double c, int levels, int per_level) {
    if (per_level < 8)
        throw Error(ErrorCode::GridTooCoarse, "graded grids need at least 8 nodes per dyadic level, got " +
                                                  std::to_string(per_level));
    if (levels < 1) throw Error(ErrorCode::InvalidArgument, "grid needs at least one dyadic level");
    Grid1D g;
    g.c = c;
    g.per_level = per_level;
    g.levels = levels;
    const int n = levels * per_level;
    g.nodes.resize(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) g.nodes[static_cast<std::size_t>(n - k)] = c * std::exp2(-static_cast<double>(k) / per_level);
    g.nodes.back() = c;
    return g;
}

namespace detail {
using elem_rule = boost::math::quadrature::gauss<double, 30>;

// ∫_lo^hi f, split at the given points when they fall strictly inside.
template <class F>
double split_integral(F&& f, double lo, double hi, std::initializer_list<double> splits) {
    std::vector<double> cuts{lo};
    for (double s : splits)
        if (s > lo && s < hi) cuts.push_back(s);
    cuts.push_back(hi);
    std::sort(cuts.begin(), cuts.end());
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) sum += elem_rule::integrate(f, cuts[i], cuts[i + 1]);
    return sum;
}
}  // namespace detail

// ---- metric along the reduction --------------------------------------------------------

/// delta_M and d_M (from the anchor t = c) along a 1D reduction with a = p / w.
class MetricModel {
public:
    MetricModel(SLProblem sl, const Grid1D& grid) : sl_(std::move(sl)), grid_(grid) {
        const auto& t = grid_.nodes;
        from_c_.assign(t.size(), 0.0);
        for (std::size_t i = t.size() - 1; i-- > 0;)
            from_c_[i] = from_c_[i + 1] + detail::elem_rule::integrate([&](double s) { return slowness(s); }, t[i], t[i + 1]);
        const auto head = dyadic_integral_from_zero([&](double s) { return slowness(s); }, t.front());
        depth_min_ = head.finite() ? head.value() : kInf;
    }

    const SLProblem& problem() const { return sl_; }
    const Grid1D& grid() const { return grid_; }

    double a(double t) const { return sl_.p(t) / sl_.w(t); }
    /// |d/dt| of both distances: a^{-1/2}.
    double slowness(double t) const { return std::sqrt(sl_.w(t) / sl_.p(t)); }

    /// Metric distance from t to the anchor c.
    double d_M(double t) const {
        const std::size_t i = grid_.element(t);
        const double hi = grid_.nodes[i + 1];
        if (t >= hi) return from_c_[i + 1];
        return from_c_[i + 1] + detail::elem_rule::integrate([&](double s) { return slowness(s); }, t, hi);
    }
    /// Metric distance to t = 0 (+inf when complete there).
    double delta_M(double t) const {
        if (!std::isfinite(depth_min_)) return kInf;
        return depth_min_ + from_c_.front() - d_M(t);
    }

private:
    SLProblem sl_;
    Grid1D grid_;
    std::vector<double> from_c_;
    double depth_min_ = kInf;
};

// ---- cutoffs and weights ----------------------------------------------------------------

/// k_j(delta_M), l_j(d_M) or the logarithmic ramp in the Euclidean depth.
struct CutoffSpec {
    enum class Kind { AnnularK, BallL, LogRamp };
    Kind kind = Kind::AnnularK;
    double lo = 0.0;  // AnnularK: r_{j+1}; BallL: R_j; LogRamp: unused
    double hi = 1.0;  // AnnularK: r_j;     BallL: R_{j+1}; LogRamp: nu

    static CutoffSpec annular_k(double r_next, double r) { return {Kind::AnnularK, r_next, r}; }
    static CutoffSpec ball_l(double R, double R_next) { return {Kind::BallL, R, R_next}; }
    static CutoffSpec log_ramp(double nu) { return {Kind::LogRamp, nu * nu, nu}; }

    std::string name() const {
        switch (kind) {
            case Kind::AnnularK: return "AnnularK";
            case Kind::BallL: return "BallL";
            case Kind::LogRamp: return "LogRamp";
        }
        return "?";
    }

    /// Value and t-derivative at depth t.
    std::pair<double, double> eval(const MetricModel& m, double t) const {
        switch (kind) {
            case Kind::AnnularK: {
                const double w = hi - lo;
                const double x = (m.delta_M(t) - lo) / w;
                return {smooth_ramp(x), smooth_ramp_d1(x) / w * m.slowness(t)};
            }
            case Kind::BallL: {
                const double w = hi - lo;
                const double x = (m.d_M(t) - lo) / w;
                return {1.0 - smooth_ramp(x), smooth_ramp_d1(x) / w * m.slowness(t)};
            }
            case Kind::LogRamp: {
                const double nu = hi;
                if (t < lo) return {0.0, 0.0};
                if (t > nu) return {1.0, 0.0};
                const double L = std::log(1.0 / nu);
                return {1.0 - std::log(nu / t) / L, 1.0 / (t * L)};
            }
        }
        return {0.0, 0.0};
    }
};

/// Exponent g of f = e^g phi.
struct AgmonWeight {
    enum class Family { Zero, SigmaG, LinearDm, TheoremFourG, GjLog };
    Family family = Family::Zero;
    SigmaSpec sigma{};
    double alpha = 0.0;   // LinearDm: g = -(alpha/2) d_M
    double beta_j = 0.0;  // TheoremFourG, GjLog
    double L = 1.0;       // TheoremFourG
    double nu = 0.0;      // TheoremFourG: nu0; GjLog: cutoff depth (<= e^{-e})

    static AgmonWeight zero() { return {}; }
    static AgmonWeight sigma_g(SigmaSpec s) {
        AgmonWeight w;
        w.family = Family::SigmaG;
        w.sigma = std::move(s);
        return w;
    }
    static AgmonWeight linear_dm(double alpha) {
        AgmonWeight w;
        w.family = Family::LinearDm;
        w.alpha = alpha;
        return w;
    }
    static AgmonWeight theorem_four_g(double beta_j, double L, double nu0) {
        if (beta_j < 2.0) throw Error(ErrorCode::InvalidArgument, "this weight needs beta >= 2");
        AgmonWeight w;
        w.family = Family::TheoremFourG;
        w.beta_j = beta_j;
        w.L = L;
        w.nu = nu0;
        return w;
    }
    static AgmonWeight gj_log(double beta_j, double nu) {
        if (!(nu > 0.0 && nu <= std::exp(-std::numbers::e)))
            throw Error(ErrorCode::InvalidArgument, "log weight cutoff must lie in (0, e^{-e}]");
        AgmonWeight w;
        w.family = Family::GjLog;
        w.beta_j = beta_j;
        w.nu = nu;
        return w;
    }

    std::string name() const {
        switch (family) {
            case Family::Zero: return "Zero";
            case Family::SigmaG: return "SigmaG(" + sigma.name() + ")";
            case Family::LinearDm: return "LinearDm";
            case Family::TheoremFourG: return "TheoremFourG";
            case Family::GjLog: return "GjLog";
        }
        return "?";
    }

    /// g and dg/dt at depth t.
    std::pair<double, double> eval(const MetricModel& m, double t) const {
        switch (family) {
            case Family::Zero: return {0.0, 0.0};
            case Family::SigmaG: {
                const double dm = m.delta_M(t);
                if (!std::isfinite(dm)) return {0.0, 0.0};
                return {sigma.G(dm), sigma.dG(dm) * m.slowness(t)};
            }
            case Family::LinearDm: return {-0.5 * alpha * m.d_M(t), 0.5 * alpha * m.slowness(t)};
            case Family::TheoremFourG: {
                // g = -G(s), G = 1 below nu0/2 and 0 above nu0
                double s, ds;
                if (beta_j > 2.0) {
                    const double e = 1.0 - 0.5 * beta_j;
                    s = L * std::pow(t, e);
                    ds = L * e * std::pow(t, e - 1.0);
                } else {
                    s = L * std::log(1.0 / t);
                    ds = -L / t;
                }
                const double x = (s - 0.5 * nu) / (0.5 * nu);
                return {-(1.0 - smooth_ramp(x)), smooth_ramp_d1(x) / (0.5 * nu) * ds};
            }
            case Family::GjLog: {
                if (t >= nu) return {0.0, 0.0};
                const double b = 1.0 - 0.5 * beta_j;
                const double ll = std::log(1.0 / t);
                const double G = b * std::log(t) + 0.5 * std::log(ll);
                const double dG = b / t * (1.0 - 1.0 / (2.0 * b * ll));
                // cutoff: 1 below nu/2, 0 above nu
                const double x = (t - 0.5 * nu) / (0.5 * nu);
                const double psi = 1.0 - smooth_ramp(x), dpsi = -smooth_ramp_d1(x) / (0.5 * nu);
                return {G * psi, dG * psi + G * dpsi};
            }
        }
        return {0.0, 0.0};
    }
};

/// f = e^g * prod(cutoffs) * taper, where the taper (1 below c/2, 0 above 3c/4)
/// keeps every test function away from the artificial end t = c.
class LocalizedFunction {
public:
    LocalizedFunction(const MetricModel& m, AgmonWeight g, std::vector<CutoffSpec> cutoffs)
        : m_(&m), g_(std::move(g)), cutoffs_(std::move(cutoffs)) {}

    struct Value {
        double f, df;     // f and df/dt
        double phi, dphi; // cutoff product and its derivative
        double g, dg;     // exponent and its derivative
    };

    Value eval(double t) const {
        const double c = m_->grid().c;
        const double x = (t - 0.5 * c) / (0.25 * c);
        double phi = 1.0 - smooth_ramp(x);
        double dphi = -smooth_ramp_d1(x) / (0.25 * c);
        for (const auto& k : cutoffs_) {
            const auto [v, dv] = k.eval(*m_, t);
            dphi = dphi * v + phi * dv;
            phi *= v;
        }
        Value out{};
        out.phi = phi;
        out.dphi = dphi;
        if (phi == 0.0 && dphi == 0.0) return out;
        const auto [g, dg] = g_.eval(*m_, t);
        out.g = g;
        out.dg = dg;
        const double e = std::exp(g);
        out.f = e * phi;
        out.df = e * (dg * phi + dphi);
        return out;
    }

    const AgmonWeight& weight() const { return g_; }
    const std::vector<CutoffSpec>& cutoffs() const { return cutoffs_; }

private:
    const MetricModel* m_;
    AgmonWeight g_;
    std::vector<CutoffSpec> cutoffs_;
};

// ---- manufactured solutions ---------------------------------------------------------------

struct Psi {
    std::function<double(double)> f, d1, d2;
};

/// V = E + (p psi')' / (w psi), so that (H - E) psi = 0 for H = -(1/w)(p .')' + V.
inline std::function<double(double)> manufactured_solution(const SLProblem& sl, const Psi& psi, double E) {
    for (int k = 0; k <= 64; ++k) {
        const double t = sl.c * std::exp2(-40.0 * k / 64.0) * (1.0 - 1e-12);
        if (!(psi.f(t) > 0.0)) throw Error(ErrorCode::NonPositivePsi, "psi must be positive, fails at t = " + std::to_string(t));
    }
    return [sl, psi, E](double t) {
        return E + (sl.dp(t) * psi.d1(t) + sl.p(t) * psi.d2(t)) / (sl.w(t) * psi.f(t));
    };
}

// ---- quadratic forms ------------------------------------------------------------------------

/// P1 form on a graded grid: exact elementwise energy with ∫_e p, lumped mass
/// M_i = ∫ hat_i w, and a lumped potential.
struct QuadraticForm {
    Grid1D grid;
    std::vector<double> P;  // per element ∫ p
    std::vector<double> M;  // per node ∫ hat_i w
    std::vector<double> V;  // potential at nodes

    double energy(const std::vector<double>& u, const std::vector<double>& v) const {
        double s = 0.0;
        const auto& t = grid.nodes;
        for (std::size_t e = 0; e + 1 < t.size(); ++e) {
            const double dt = t[e + 1] - t[e];
            s += P[e] * (u[e + 1] - u[e]) * (v[e + 1] - v[e]) / (dt * dt);
        }
        return s;
    }
    double inner(const std::vector<double>& u, const std::vector<double>& v) const {
        double s = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) s += M[i] * u[i] * v[i];
        return s;
    }
    double operator()(const std::vector<double>& u, const std::vector<double>& v) const {
        double s = energy(u, v);
        for (std::size_t i = 0; i < u.size(); ++i) s += M[i] * V[i] * u[i] * v[i];
        return s;
    }
};

inline QuadraticForm assemble_form(const SLProblem& sl, const Grid1D& grid,
                                   const std::function<double(double)>& V = {}) {
    if (grid.per_level < 8) throw Error(ErrorCode::GridTooCoarse, "fewer than 8 nodes per dyadic level");
    QuadraticForm q;
    q.grid = grid;
    const auto& t = grid.nodes;
    const std::size_t n = t.size();
    q.P.resize(n - 1);
    q.M.assign(n, 0.0);
    q.V.assign(n, 0.0);
    for (std::size_t e = 0; e + 1 < n; ++e) {
        const double a = t[e], b = t[e + 1], dt = b - a;
        q.P[e] = detail::elem_rule::integrate([&](double s) { return sl.p(s); }, a, b);
        q.M[e] += detail::elem_rule::integrate([&](double s) { return sl.w(s) * (b - s) / dt; }, a, b);
        q.M[e + 1] += detail::elem_rule::integrate([&](double s) { return sl.w(s) * (s - a) / dt; }, a, b);
    }
    if (V)
        for (std::size_t i = 0; i < n; ++i) q.V[i] = V(t[i]);
    return q;
}

/// Form of the collar reduction of component j on (0, grid.c).
inline QuadraticForm assemble_form(const CoefficientProfile& prof, int j, const Grid1D& grid,
                                   const std::function<double(double)>& V = {}) {
    return assemble_form(reduce_collar(prof, j, grid.c), grid, V);
}

// ---- localization identity ------------------------------------------------------------------

/// |h[f psi, f psi] - E <f psi, f psi> - <psi, a f'^2 psi>| / max(1, |h[f psi, f psi]|)
/// with V manufactured from (psi, E).
inline double localization_residual(const SLProblem& sl, const Grid1D& grid, const Psi& psi, double E,
                                    const AgmonWeight& g, const std::vector<CutoffSpec>& cutoffs) {
    const auto V = manufactured_solution(sl, psi, E);
    const auto form = assemble_form(sl, grid, V);
    const MetricModel model(sl, grid);
    const LocalizedFunction f(model, g, cutoffs);
    const auto& t = grid.nodes;
    const std::size_t n = t.size();
    std::vector<double> u(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = f.eval(t[i]).f * psi.f(t[i]);
    if (u.front() != 0.0 || u[1] != 0.0 || u.back() != 0.0)
        throw Error(ErrorCode::GridTooCoarse, "test function does not vanish at the grid ends");
    const double h = form(u, u);
    double rhs = E * form.inner(u, u);
    // |grad_M f|^2 jumps at cutoff breakpoints: integrate per element, not lumped
    auto grad_density = [&](double s) {
        const auto fv = f.eval(s);
        const double ps = psi.f(s);
        return model.a(s) * fv.df * fv.df * ps * ps * sl.w(s);
    };
    for (std::size_t e = 0; e + 1 < n; ++e) rhs += detail::elem_rule::integrate(grad_density, t[e], t[e + 1]);
    return std::abs(h - rhs) / std::max(1.0, std::abs(h));
}

struct RefinementRow {
    int per_level = 0;
    double h = 0.0;
    double residual = 0.0;
    double fitted_order = 0.0;  // log2 ratio against the previous row (0 for the first)
};

/// Residuals on grids with per_level doubled each step; the last row's order is the fit.
inline std::vector<RefinementRow> localization_refinement(const SLProblem& sl, int levels,
                                                          const std::vector<int>& per_levels, const Psi& psi,
                                                          double E, const AgmonWeight& g,
                                                          const std::vector<CutoffSpec>& cutoffs) {
    std::vector<RefinementRow> rows;
    for (int n : per_levels) {
        const auto grid = graded_grid(sl.c, levels, n);
        RefinementRow r;
        r.per_level = n;
        r.h = grid.h();
        r.residual = localization_residual(sl, grid, psi, E, g, cutoffs);
        if (!rows.empty()) r.fitted_order = std::log(rows.back().residual / r.residual) / std::log(rows.back().h / r.h);
        rows.push_back(r);
    }
    return rows;
}

/// Least-squares slope of log residual against log h.
inline double fitted_order(const std::vector<RefinementRow>& rows) {
    std::vector<double> x, y;
    for (const auto& r : rows) {
        x.push_back(std::log(r.h));
        y.push_back(std::log(std::max(r.residual, 1e-300)));
    }
    return ::confine::detail::ls_slope(x, y);
}

inline void write_refinement_csv(std::ostream& os, const std::vector<RefinementRow>& rows) {
    os << "h,residual,fitted_order\n";
    os.precision(12);
    for (const auto& r : rows) os << r.h << ',' << r.residual << ',' << r.fitted_order << '\n';
}

// ---- basic inequality -------------------------------------------------------------------------

struct BasicInequality {
    double lhs = 0.0;  // <psi, f^2 psi>
    double rhs = 0.0;  // (2 / |E - E0|) <psi, |m| psi>
    double h = 0.0;    // relative grid spacing
    bool holds(double slack_per_h = 10.0) const { return lhs <= rhs * (1.0 + slack_per_h * h); }
};

/// Both sides of the basic inequality for f = e^g phi with
/// m = e^{2g}(2 phi a g' phi' + a phi'^2). Checks |grad_M g|^2 <= B + |E - E0|/2 at every node first.
inline BasicInequality basic_inequality_check(const SLProblem& sl, const Grid1D& grid, const Psi& psi, double E,
                                              double E0, const std::function<double(double)>& B,
                                              const AgmonWeight& g, const std::vector<CutoffSpec>& cutoffs) {
    if (!(E < E0)) throw Error(ErrorCode::InvalidArgument, "needs E < E0");
    const double gap = std::abs(E - E0);
    const MetricModel model(sl, grid);
    const LocalizedFunction f(model, g, cutoffs);
    for (double t : grid.nodes) {
        const auto [gv, dg] = g.eval(model, t);
        (void)gv;
        const double grad2 = model.a(t) * dg * dg;
        const double bound = B(t) + 0.5 * gap;
        if (grad2 > bound * (1.0 + 1e-9) + 1e-12)
            throw Error(ErrorCode::PreconditionViolated,
                        "|grad_M g|^2 = " + std::to_string(grad2) + " exceeds B + |E-E0|/2 = " + std::to_string(bound) +
                            " at t = " + std::to_string(t));
    }
    BasicInequality out;
    out.h = grid.h();
    const auto& t = grid.nodes;
    for (std::size_t e = 0; e + 1 < t.size(); ++e) {
        auto lhs_density = [&](double s) {
            const auto v = f.eval(s);
            const double ps = psi.f(s);
            return v.f * v.f * ps * ps * sl.w(s);
        };
        auto m_density = [&](double s) {
            const auto v = f.eval(s);
            if (v.phi == 0.0 && v.dphi == 0.0) return 0.0;
            const double a = model.a(s);
            const double m = std::exp(2.0 * v.g) * (2.0 * v.phi * a * v.dg * v.dphi + a * v.dphi * v.dphi);
            const double ps = psi.f(s);
            return std::abs(m) * ps * ps * sl.w(s);
        };
        out.lhs += detail::elem_rule::integrate(lhs_density, t[e], t[e + 1]);
        out.rhs += detail::elem_rule::integrate(m_density, t[e], t[e + 1]);
    }
    out.rhs *= 2.0 / gap;
    return out;
}

// ---- Hardy barrier ------------------------------------------------------------------------------

struct HardyConstants {
    double kappa = 0.0;   // beta + gamma + d - d_j - 2
    double h_j = 0.0;     // optimal vector-field amplitude rho_- D_- kappa / 2
    double nu2 = 0.0;     // depth below which delta_j is C^2
    double nu3 = 0.0;     // min(1, collar depth, nu2)
    double C3 = 0.0;      // sup |Δδ - (d - d_j - 1)/δ| over the collar
    double C2 = 0.0;      // |2 / kappa| C3
    double nu1 = 0.0;     // min(nu3, 1 / C2)
    double C1 = 0.0;      // sampled sup of the vector-field expression on [nu1/2, nu3]
    double coefficient = 0.0;  // D_- rho_- kappa^2 / (4 rho_+)
};

namespace detail {

// Depth up to which the two-sided bounds D_± t^beta, rho_± t^gamma are meant to hold.
inline double collar_depth(const BoundaryComponent& c) {
    double nu = c.nu0;
    if (c.a.leading() && c.a.exact_depth() > 0.0) nu = std::min(nu, c.a.exact_depth());
    if (c.rho.leading() && c.rho.exact_depth() > 0.0) nu = std::min(nu, c.rho.exact_depth());
    return nu;
}

// Cutoff psi_j: 1 below nu3/2, 0 above nu3.
inline std::pair<double, double> collar_cutoff(double nu3, double t) {
    const double x = (t - 0.5 * nu3) / (0.5 * nu3);
    return {1.0 - smooth_ramp(x), -smooth_ramp_d1(x) / (0.5 * nu3)};
}

// (div(X psi) - (X psi)^2 / (rho a)) / rho at depth t with X = h t^{beta+gamma-1} grad delta.
inline double vector_field_density(const CoefficientProfile& p, const BoundaryComponent& c, double h, double nu3,
                                   double t) {
    const auto [psi, dpsi] = collar_cutoff(nu3, t);
    if (psi == 0.0 && dpsi == 0.0) return 0.0;
    const double s = c.beta + c.gamma - 1.0;
    const double X = h * std::pow(t, s);
    const double dX = h * s * std::pow(t, s - 1.0);
    const double lap = distance_laplacian(p.domain, c.id, t);
    const double rho = c.rho(t);
    const double Xp = X * psi;
    return (dX * psi + X * dpsi + lap * Xp - Xp * Xp / (rho * c.a(t))) / rho;
}

}  // namespace detail

inline HardyConstants hardy_constants(const CoefficientProfile& p, int j) {
    const auto& c = p.component(j);
    const int d = p.dim();
    HardyConstants k;
    k.kappa = c.beta + c.gamma + d - c.d_j - 2.0;
    if (k.kappa == 0.0)
        throw Error(ErrorCode::BarrierUndefined, "beta + gamma + d - d_j - 2 = 0 at component " + std::to_string(j));
    k.h_j = 0.5 * c.rho_minus * c.D_minus * k.kappa;
    k.coefficient = c.D_minus * c.rho_minus * k.kappa * k.kappa / (4.0 * c.rho_plus);
    const double reach = p.domain.reach(j);
    k.nu2 = std::isfinite(reach) ? 0.5 * reach : 1.0;
    k.nu3 = std::min({1.0, detail::collar_depth(c), k.nu2});
    k.C3 = estimate_curvature_constant(p, j, k.nu3, 1e-4 * k.nu3);
    k.C2 = std::abs(2.0 / k.kappa) * k.C3;
    k.nu1 = k.C2 > 0.0 ? std::min(k.nu3, 1.0 / k.C2) : k.nu3;
    // sampled sup, refined around the largest sample
    const int N = 4000;
    const double lo = 0.5 * k.nu1, hi = k.nu3;
    double best = 0.0, best_t = lo;
    for (int i = 0; i <= N; ++i) {
        const double t = lo + (hi - lo) * i / N;
        const double v = std::abs(detail::vector_field_density(p, c, k.h_j, k.nu3, t));
        if (v > best) best = v, best_t = t;
    }
    const double step = (hi - lo) / N;
    for (int i = -200; i <= 200; ++i) {
        const double t = std::clamp(best_t + step * i / 100.0, lo, hi);
        best = std::max(best, std::abs(detail::vector_field_density(p, c, k.h_j, k.nu3, t)));
    }
    k.C1 = best;
    return k;
}

/// H(t) = D_- rho_- kappa^2 / (4 rho_+) t^{beta-2} (1 - C2 t) for t <= nu1/2, else 0.
inline double hardy_barrier(const CoefficientProfile& p, int j, double t, const HardyConstants& k) {
    if (t > 0.5 * k.nu1) return 0.0;
    return k.coefficient * std::pow(t, p.component(j).beta - 2.0) * (1.0 - k.C2 * t);
}

inline double hardy_barrier(const CoefficientProfile& p, int j, double t) {
    return hardy_barrier(p, j, t, hardy_constants(p, j));
}

/// div X - X (rho D)^{-1} X at depth t for X = rho_- D_- h_scale t^{beta+gamma-1} grad delta
/// (h_scale defaults to the maximizer kappa/2).
inline double vector_field_bound(const CoefficientProfile& p, int j, double t, std::optional<double> h_scale = {}) {
    const auto& c = p.component(j);
    const double kappa = c.beta + c.gamma + p.dim() - c.d_j - 2.0;
    const double h = c.rho_minus * c.D_minus * h_scale.value_or(0.5 * kappa);
    const double s = c.beta + c.gamma - 1.0;
    const double X = h * std::pow(t, s);
    const double div = h * s * std::pow(t, s - 1.0) + X * distance_laplacian(p.domain, j, t);
    return div - X * X / (c.rho(t) * c.a(t));
}

struct HardyCheck {
    double min_slack = kInf;
    HardyConstants constants;
    int samples = 0;
};

/// Random piecewise-linear phi with 5..50 knots on grid nodes, values uniform in [-1, 1],
/// vanishing at both ends of a random support.
inline std::vector<double> random_test_function(const Grid1D& grid, std::mt19937_64& rng, std::size_t first = 1,
                                                std::size_t last = 0) {
    const std::size_t n = grid.size();
    if (last == 0 || last > n - 2) last = n - 2;
    std::uniform_int_distribution<std::size_t> pick_a(first, last - 7);
    const std::size_t a = pick_a(rng);
    std::uniform_int_distribution<std::size_t> pick_b(a + 6, last);
    const std::size_t b = pick_b(rng);
    std::uniform_int_distribution<int> pick_k(5, 50);
    const int want = pick_k(rng);
    std::vector<std::size_t> knots{a, b};
    std::uniform_int_distribution<std::size_t> pick_i(a + 1, b - 1);
    for (int k = 0; k < want && knots.size() < b - a + 1; ++k) knots.push_back(pick_i(rng));
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    std::vector<double> kv(knots.size());
    for (std::size_t i = 1; i + 1 < knots.size(); ++i) kv[i] = val(rng);
    std::vector<double> u(n, 0.0);
    for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
        const std::size_t i0 = knots[k], i1 = knots[k + 1];
        for (std::size_t i = i0; i <= i1; ++i) {
            const double x = (grid.nodes[i] - grid.nodes[i0]) / (grid.nodes[i1] - grid.nodes[i0]);
            u[i] = (1.0 - x) * kv[k] + x * kv[k + 1];
        }
    }
    return u;
}

/// min over random phi of (h0[phi] + C1 <phi, phi> - ∫ H phi^2 rho) / h0[phi] on the collar
/// reduction of component j; exact P1 energy and Gauss quadrature for the weighted terms.
inline HardyCheck hardy_inequality_check(const CoefficientProfile& p, int j, const Grid1D& grid, int n_samples,
                                         std::uint64_t seed = 0xC0FFEE) {
    HardyCheck out;
    out.constants = hardy_constants(p, j);
    const auto& k = out.constants;
    const SLProblem sl = reduce_collar(p, j, grid.c);
    const auto form = assemble_form(sl, grid);
    const auto& t = grid.nodes;
    const std::size_t n = t.size();
    // per element: ∫ hat_a hat_b w and ∫ hat_a hat_b H w (a, b in {0, 1})
    std::vector<std::array<double, 3>> mass(n - 1), bar(n - 1);
    for (std::size_t e = 0; e + 1 < n; ++e) {
        const double lo = t[e], hi = t[e + 1], dt = hi - lo;
        for (int q = 0; q < 3; ++q) {
            auto shape = [&](double s) {
                const double l0 = (hi - s) / dt, l1 = (s - lo) / dt;
                return q == 0 ? l0 * l0 : q == 1 ? l0 * l1 : l1 * l1;
            };
            mass[e][q] = detail::elem_rule::integrate([&](double s) { return shape(s) * sl.w(s); }, lo, hi);
            bar[e][q] = detail::split_integral(
                [&](double s) { return shape(s) * hardy_barrier(p, j, s, k) * sl.w(s); }, lo, hi, {0.5 * k.nu1});
        }
    }
    auto quad = [](const std::array<double, 3>& m, double u0, double u1) {
        return m[0] * u0 * u0 + 2.0 * m[1] * u0 * u1 + m[2] * u1 * u1;
    };
    std::mt19937_64 rng(seed);
    for (int s = 0; s < n_samples; ++s) {
        const auto u = random_test_function(grid, rng);
        const double h0 = form.energy(u, u);
        if (h0 <= 0.0) continue;
        double l2 = 0.0, hb = 0.0;
        for (std::size_t e = 0; e + 1 < n; ++e) {
            if (u[e] == 0.0 && u[e + 1] == 0.0) continue;
            l2 += quad(mass[e], u[e], u[e + 1]);
            hb += quad(bar[e], u[e], u[e + 1]);
        }
        out.min_slack = std::min(out.min_slack, (h0 + k.C1 * l2 - hb) / h0);
        ++out.samples;
    }
    return out;
}

}  // namespace confine
