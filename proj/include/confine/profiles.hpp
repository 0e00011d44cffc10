#pragma once

// Domains, boundary components and isotropic coefficient fields
// D(x) = a(delta_j(x)) I, rho(x) = rho_j(delta_j(x)).

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "errors.hpp"
#include "numerics.hpp"
#include "toml_lite.hpp"

namespace confine {

using Point = Eigen::VectorXd;

enum class DomainKind { IntervalNormalModel, Ball, Annulus, PuncturedBall, PuncturedSpace, ExteriorDomain, HalfStrip };

inline const char* to_string(DomainKind k) {
    switch (k) {
        case DomainKind::IntervalNormalModel: return "interval";
        case DomainKind::Ball: return "ball";
        case DomainKind::Annulus: return "annulus";
        case DomainKind::PuncturedBall: return "punctured_ball";
        case DomainKind::PuncturedSpace: return "punctured_space";
        case DomainKind::ExteriorDomain: return "exterior";
        case DomainKind::HalfStrip: return "half_strip";
    }
    return "?";
}

/// How a boundary component sits in space; fixes the normal-ray Jacobian.
enum class ComponentShape { Flat, SphereInside, SphereOutside, Point };

struct DomainSpec {
    DomainKind kind = DomainKind::Ball;
    int dim = 2;
    double length = 1.0;  // interval
    double radius = 1.0;  // ball, punctured ball, exterior
    double r_in = 0.5, r_out = 1.0;
    double width = 2.0;  // half strip: Omega = {|x_2| < width/2}

    static DomainSpec interval(double c) { return {DomainKind::IntervalNormalModel, 1, c}; }
    static DomainSpec ball(double R, int d = 2) {
        DomainSpec s{DomainKind::Ball, d};
        s.radius = R;
        return s;
    }
    static DomainSpec annulus(double rin, double rout, int d = 2) {
        DomainSpec s{DomainKind::Annulus, d};
        s.r_in = rin;
        s.r_out = rout;
        return s;
    }
    static DomainSpec punctured_ball(double R, int d = 2) {
        DomainSpec s{DomainKind::PuncturedBall, d};
        s.radius = R;
        return s;
    }
    static DomainSpec punctured_space(int d = 2) { return {DomainKind::PuncturedSpace, d}; }
    static DomainSpec exterior(double R, int d = 2) {
        DomainSpec s{DomainKind::ExteriorDomain, d};
        s.radius = R;
        return s;
    }
    static DomainSpec half_strip(double width = 2.0) {
        DomainSpec s{DomainKind::HalfStrip, 2};
        s.width = width;
        return s;
    }

    bool bounded() const {
        return kind == DomainKind::IntervalNormalModel || kind == DomainKind::Ball || kind == DomainKind::Annulus ||
               kind == DomainKind::PuncturedBall;
    }

    int component_count() const {
        switch (kind) {
            case DomainKind::Annulus:
            case DomainKind::PuncturedBall:
            case DomainKind::HalfStrip: return 2;
            default: return 1;
        }
    }

    ComponentShape shape(int id) const {
        switch (kind) {
            case DomainKind::IntervalNormalModel:
            case DomainKind::HalfStrip: return ComponentShape::Flat;
            case DomainKind::Ball: return ComponentShape::SphereInside;
            case DomainKind::Annulus: return id == 0 ? ComponentShape::SphereOutside : ComponentShape::SphereInside;
            case DomainKind::PuncturedBall: return id == 0 ? ComponentShape::Point : ComponentShape::SphereInside;
            case DomainKind::PuncturedSpace: return ComponentShape::Point;
            case DomainKind::ExteriorDomain: return ComponentShape::SphereOutside;
        }
        return ComponentShape::Flat;
    }

    int component_dim(int id) const { return shape(id) == ComponentShape::Point ? 0 : dim - 1; }

    /// Radius of curvature of a spherical component (0 for flat and point components).
    double component_radius(int id) const {
        switch (kind) {
            case DomainKind::Ball: return radius;
            case DomainKind::Annulus: return id == 0 ? r_in : r_out;
            case DomainKind::PuncturedBall: return id == 0 ? 0.0 : radius;
            case DomainKind::ExteriorDomain: return radius;
            default: return 0.0;
        }
    }

    /// Largest depth along the normal ray at which component `id` is still the nearest one.
    double reach(int id) const {
        switch (kind) {
            case DomainKind::IntervalNormalModel: return length;
            case DomainKind::Ball: return radius;
            case DomainKind::Annulus: return 0.5 * (r_out - r_in);
            case DomainKind::PuncturedBall: return 0.5 * radius;
            case DomainKind::HalfStrip: return 0.5 * width;
            default: return kInf;
        }
        (void)id;
    }

    /// Minimal distance between distinct components (+inf with a single one).
    double separation() const {
        switch (kind) {
            case DomainKind::Annulus: return r_out - r_in;
            case DomainKind::PuncturedBall: return radius;
            case DomainKind::HalfStrip: return width;
            default: return kInf;
        }
    }
};

struct BoundaryComponent {
    int id = 0;
    int d_j = 1;
    double beta = 0.0;
    double gamma = 0.0;
    double D_minus = 1.0, D_plus = 1.0;
    double rho_minus = 1.0, rho_plus = 1.0;
    double K = 1.0;
    double L = 1.0;
    double nu0 = 0.25;
    ScalarLaw a;    // diffusion scale as a function of depth
    ScalarLaw rho;  // weight as a function of depth

    int codim(int d) const { return d - d_j; }
    double eta(int d) const { return 1.0 - codim(d); }
    double D() const { return D_plus; }
};

enum class RhoGrowth { Power, Exp };

struct InfinityRecord {
    double beta_inf = 2.0;
    double L_inf = 1.0;
    double R_cut = 4.0;
    RhoGrowth rho_growth = RhoGrowth::Power;  // rho <= |x|^L, or rho <= exp(L |x|^kappa)
    double kappa = 0.0;
};

struct CoefficientProfile {
    DomainSpec domain;
    std::vector<BoundaryComponent> components;
    std::optional<InfinityRecord> infinity;

    const BoundaryComponent& component(int id) const {
        for (const auto& c : components)
            if (c.id == id) return c;
        throw Error(ErrorCode::InvalidArgument, "no component with id " + std::to_string(id));
    }
    int dim() const { return domain.dim; }
};

/// Component with blended power laws D t^beta, rho t^gamma (the default model).
inline BoundaryComponent make_component(int id, int d_j, double beta, double gamma, double D = 1.0,
                                        double rho = 1.0, double nu0 = 0.25) {
    BoundaryComponent c;
    c.id = id;
    c.d_j = d_j;
    c.beta = beta;
    c.gamma = gamma;
    c.D_minus = c.D_plus = D;
    c.rho_minus = c.rho_plus = rho;
    c.K = D;
    c.nu0 = nu0;
    c.a = ScalarLaw::blended(D, beta, nu0);
    c.rho = ScalarLaw::blended(rho, gamma, nu0);
    return c;
}

/// Same exponents with laws that stay pure powers at every depth.
inline BoundaryComponent make_power_component(int id, int d_j, double beta, double gamma, double D = 1.0,
                                              double rho = 1.0, double nu0 = 0.25) {
    BoundaryComponent c = make_component(id, d_j, beta, gamma, D, rho, nu0);
    c.a = ScalarLaw::power(D, beta);
    c.rho = ScalarLaw::power(rho, gamma);
    return c;
}

/// The strip law a(t) = H^2 / (t (2H - t)), i.e. 1/(1 - x_2^2) on {|x_2| < 1}.
inline ScalarLaw strip_law(double H) {
    return ScalarLaw::custom([H](double t) { return H * H / (t * (2.0 * H - t)); },
                             [H](double t) {
                                 const double q = t * (2.0 * H - t);
                                 return -H * H * (2.0 * H - 2.0 * t) / (q * q);
                             },
                             PowerLaw{0.5 * H, -1.0}, 0.0);
}

/// Same-law profile on every component of `domain`.
inline CoefficientProfile uniform_profile(const DomainSpec& domain, double beta, double gamma, double D = 1.0,
                                          double rho = 1.0, double nu0 = 0.25) {
    CoefficientProfile p;
    p.domain = domain;
    for (int j = 0; j < domain.component_count(); ++j)
        p.components.push_back(make_component(j, domain.component_dim(j), beta, gamma, D, rho, nu0));
    return p;
}

/// The half-strip {|x_2| < 1} with D = (1 - x_2^2)^{-1} I and rho = 1.
inline CoefficientProfile half_strip_profile(double width = 2.0) {
    CoefficientProfile p;
    p.domain = DomainSpec::half_strip(width);
    const double H = 0.5 * width;
    for (int j = 0; j < 2; ++j) {
        BoundaryComponent c = make_component(j, 1, -1.0, 0.0, 0.5 * H, 1.0, std::min(1.0, 0.5 * H));
        c.a = strip_law(H);
        c.rho = ScalarLaw::constant(1.0);
        // a(t) t lies between H/2 (t -> 0) and H (t = H)
        c.D_minus = 0.5 * H;
        c.D_plus = H;
        c.K = H;
        p.components.push_back(std::move(c));
    }
    return p;
}

struct BoundaryDistance {
    double delta = 0.0;
    int component = 0;
};

/// Euclidean distance to the nearest boundary component; ties go to the smaller id.
inline BoundaryDistance boundary_distance(const DomainSpec& domain, const Point& x) {
    if (x.size() != domain.dim)
        throw Error(ErrorCode::InvalidArgument, "point has dimension " + std::to_string(x.size()) + ", domain has " +
                                                    std::to_string(domain.dim));
    auto outside = [] { throw Error(ErrorCode::PointOutsideDomain, "point not strictly inside the domain"); };
    const double r = x.norm();
    BoundaryDistance out;
    switch (domain.kind) {
        case DomainKind::IntervalNormalModel:
            if (!(x[0] > 0.0 && x[0] <= domain.length)) outside();
            out = {x[0], 0};
            break;
        case DomainKind::Ball:
            if (!(r < domain.radius)) outside();
            out = {domain.radius - r, 0};
            break;
        case DomainKind::Annulus: {
            if (!(r > domain.r_in && r < domain.r_out)) outside();
            const double din = r - domain.r_in, dout = domain.r_out - r;
            out = din <= dout ? BoundaryDistance{din, 0} : BoundaryDistance{dout, 1};
            break;
        }
        case DomainKind::PuncturedBall: {
            if (!(r > 0.0 && r < domain.radius)) outside();
            const double dout = domain.radius - r;
            out = r <= dout ? BoundaryDistance{r, 0} : BoundaryDistance{dout, 1};
            break;
        }
        case DomainKind::PuncturedSpace:
            if (!(r > 0.0)) outside();
            out = {r, 0};
            break;
        case DomainKind::ExteriorDomain:
            if (!(r > domain.radius)) outside();
            out = {r - domain.radius, 0};
            break;
        case DomainKind::HalfStrip: {
            const double H = 0.5 * domain.width;
            if (!(std::abs(x[1]) < H)) outside();
            const double dlow = x[1] + H, dup = H - x[1];
            out = dlow <= dup ? BoundaryDistance{dlow, 0} : BoundaryDistance{dup, 1};
            break;
        }
    }
    return out;
}

namespace detail {
inline double far_field_scale(const CoefficientProfile& p, const Point& x) {
    if (!p.infinity || p.domain.bounded()) return 1.0;
    const double R = p.infinity->R_cut;
    const double r = x.norm();
    if (r <= R) return 1.0;
    return std::pow(r / R, p.infinity->beta_inf * smooth_ramp((r - R) / R));
}
}  // namespace detail

/// a(delta_j(x)) I for the nearest component j.
inline Eigen::MatrixXd evaluate_diffusion(const CoefficientProfile& p, const Point& x) {
    const auto bd = boundary_distance(p.domain, x);
    const double a = p.component(bd.component).a(bd.delta) * detail::far_field_scale(p, x);
    return a * Eigen::MatrixXd::Identity(p.dim(), p.dim());
}

inline double evaluate_scale(const CoefficientProfile& p, const Point& x) {
    const auto bd = boundary_distance(p.domain, x);
    return p.component(bd.component).a(bd.delta) * detail::far_field_scale(p, x);
}

inline double evaluate_weight(const CoefficientProfile& p, const Point& x) {
    const auto bd = boundary_distance(p.domain, x);
    return p.component(bd.component).rho(bd.delta);
}

/// Ratio of surface measures along the normal ray from component j: J(t) with J(0+) normalised to 1
/// (t^{d-1} for a point component).
inline double normal_jacobian(const DomainSpec& dom, int j, double t) {
    const int n = dom.dim - 1;
    const double R = dom.component_radius(j);
    switch (dom.shape(j)) {
        case ComponentShape::Flat: return 1.0;
        case ComponentShape::SphereInside: return std::pow((R - t) / R, n);
        case ComponentShape::SphereOutside: return std::pow((R + t) / R, n);
        case ComponentShape::Point: return std::pow(t, n);
    }
    return 1.0;
}

/// Delta of the distance function at depth t from component j (= J'/J).
inline double distance_laplacian(const DomainSpec& dom, int j, double t) {
    const int n = dom.dim - 1;
    const double R = dom.component_radius(j);
    switch (dom.shape(j)) {
        case ComponentShape::Flat: return 0.0;
        case ComponentShape::SphereInside: return -n / (R - t);
        case ComponentShape::SphereOutside: return n / (R + t);
        case ComponentShape::Point: return n / t;
    }
    return 0.0;
}

/// A point at depth t from component j, on a fixed reference ray.
inline Point point_at_depth(const DomainSpec& dom, int j, double t) {
    Point x = Point::Zero(dom.dim);
    switch (dom.kind) {
        case DomainKind::IntervalNormalModel: x[0] = t; break;
        case DomainKind::HalfStrip: x[1] = j == 0 ? -0.5 * dom.width + t : 0.5 * dom.width - t; break;
        default: {
            const double R = dom.component_radius(j);
            double r = t;
            switch (dom.shape(j)) {
                case ComponentShape::SphereInside: r = R - t; break;
                case ComponentShape::SphereOutside: r = R + t; break;
                default: break;
            }
            x[0] = r;
        }
    }
    return x;
}

struct Diagnostic {
    std::string code;
    std::string message;
};

inline std::vector<Diagnostic> validate(const CoefficientProfile& p) {
    std::vector<Diagnostic> out;
    auto add = [&](std::string code, std::string msg) { out.push_back({std::move(code), std::move(msg)}); };
    const auto& dom = p.domain;
    if (dom.dim < 1) add("BadDimension", "dimension must be >= 1");
    switch (dom.kind) {
        case DomainKind::IntervalNormalModel:
            if (!(dom.length > 0)) add("NonPositiveRadius", "interval length must be positive");
            if (dom.dim != 1) add("BadDimension", "interval model is one-dimensional");
            break;
        case DomainKind::Ball:
        case DomainKind::PuncturedBall:
        case DomainKind::ExteriorDomain:
            if (!(dom.radius > 0)) add("NonPositiveRadius", "radius must be positive");
            break;
        case DomainKind::Annulus:
            if (!(dom.r_in > 0 && dom.r_out > 0)) add("NonPositiveRadius", "radii must be positive");
            if (!(dom.r_in < dom.r_out)) add("BadAnnulus", "need r_in < r_out");
            break;
        case DomainKind::HalfStrip:
            if (dom.dim != 2) add("BadDimension", "half strip requires d = 2");
            if (!(dom.width > 0)) add("NonPositiveRadius", "width must be positive");
            break;
        case DomainKind::PuncturedSpace: break;
    }
    if (static_cast<int>(p.components.size()) != dom.component_count())
        add("ComponentCount", std::string(to_string(dom.kind)) + " has " + std::to_string(dom.component_count()) +
                                  " boundary components, profile lists " + std::to_string(p.components.size()));
    const double d0 = dom.separation();
    for (const auto& c : p.components) {
        const std::string tag = "component " + std::to_string(c.id) + ": ";
        if (c.id < 0 || c.id >= dom.component_count()) add("UnknownComponent", tag + "id out of range");
        else if (c.d_j != dom.component_dim(c.id))
            add("BadCodimension", tag + "d_j = " + std::to_string(c.d_j) + " but the component has dimension " +
                                      std::to_string(dom.component_dim(c.id)));
        if (c.d_j < 0 || c.d_j > dom.dim - 1) add("BadCodimension", tag + "need 0 <= d_j <= d-1");
        if (!(c.D_minus > 0 && c.D_plus > 0)) add("NonPositiveDiffusion", tag + "D bounds must be positive");
        if (!(c.rho_minus > 0 && c.rho_plus > 0)) add("NonPositiveWeight", tag + "rho bounds must be positive");
        if (c.D_minus > c.D_plus) add("BoundOrder", tag + "D_minus > D_plus");
        if (c.rho_minus > c.rho_plus) add("BoundOrder", tag + "rho_minus > rho_plus");
        if (!(c.K > 0)) add("NonPositiveConstant", tag + "K must be positive");
        if (!(c.nu0 > 0 && c.nu0 <= 1.0)) add("Nu0Range", tag + "need 0 < nu0 <= 1");
        if (dom.component_count() > 1 && 4.0 * c.nu0 > d0)
            add("CollarOverlap", tag + "4 nu0 = " + std::to_string(4.0 * c.nu0) + " exceeds separation " +
                                     std::to_string(d0));
        // sample laws on a log grid through the collar and a little beyond
        const double top = std::min(dom.reach(c.id), 2.0 * c.nu0);
        bool bad_a = false, bad_rho = false;
        for (int k = 0; k <= 200 && std::isfinite(top); ++k) {
            const double t = top * std::pow(2.0, -30.0 * k / 200.0);
            if (t >= dom.reach(c.id) && dom.reach(c.id) < kInf) continue;
            const double av = c.a(t), rv = c.rho(t);
            if (!(av > 0) || !std::isfinite(av)) bad_a = true;
            if (!(rv > 0) || !std::isfinite(rv)) bad_rho = true;
        }
        if (bad_a) add("NonPositiveDiffusion", tag + "a(t) not positive on the sample grid");
        if (bad_rho) add("NonPositiveWeight", tag + "rho(t) not positive on the sample grid");
    }
    if (p.infinity) {
        if (dom.bounded()) add("UnexpectedInfinityRecord", "bounded domain has an [infinity] record");
        if (!(p.infinity->R_cut > 0)) add("NonPositiveRadius", "infinity R must be positive");
        if (dom.kind == DomainKind::ExteriorDomain && p.infinity->R_cut < 2.0 * dom.radius)
            add("InfinityCut", "need boundary inside |x| < R/2");
    }
    return out;
}

// ---- TOML / JSON input -----------------------------------------------------

namespace detail {
inline double num(const nlohmann::json& t, const char* key, double fallback) {
    if (!t.contains(key)) return fallback;
    const auto& v = t.at(key);
    if (!v.is_number()) throw Error(ErrorCode::ParseError, std::string("'") + key + "' must be a number");
    return v.get<double>();
}
inline double num_req(const nlohmann::json& t, const char* key, const std::string& where) {
    if (!t.contains(key)) throw Error(ErrorCode::ParseError, where + ": missing '" + key + "'");
    return num(t, key, 0.0);
}
}  // namespace detail

inline DomainKind parse_domain_kind(const std::string& s) {
    if (s == "interval" || s == "normal_model") return DomainKind::IntervalNormalModel;
    if (s == "ball") return DomainKind::Ball;
    if (s == "annulus") return DomainKind::Annulus;
    if (s == "punctured_ball") return DomainKind::PuncturedBall;
    if (s == "punctured_space") return DomainKind::PuncturedSpace;
    if (s == "exterior") return DomainKind::ExteriorDomain;
    if (s == "half_strip") return DomainKind::HalfStrip;
    throw Error(ErrorCode::ParseError, "unknown domain kind '" + s + "'");
}

/// Builds a profile from a parsed tree (see profiles/*.toml for the layout).
inline CoefficientProfile profile_from_tree(const nlohmann::json& root) {
    using detail::num;
    if (!root.contains("domain") || !root.at("domain").is_object())
        throw Error(ErrorCode::ParseError, "missing [domain] table");
    const auto& dt = root.at("domain");
    if (!dt.contains("kind") || !dt.at("kind").is_string())
        throw Error(ErrorCode::ParseError, "[domain] needs kind = \"...\"");
    CoefficientProfile p;
    auto& dom = p.domain;
    dom.kind = parse_domain_kind(dt.at("kind").get<std::string>());
    dom.dim = static_cast<int>(num(dt, "dim", dom.kind == DomainKind::IntervalNormalModel ? 1 : 2));
    dom.radius = num(dt, "radius", 1.0);
    dom.length = num(dt, "length", num(dt, "c", 1.0));
    dom.r_in = num(dt, "r_in", 0.5);
    dom.r_out = num(dt, "r_out", 1.0);
    dom.width = num(dt, "width", 2.0);

    if (dom.kind == DomainKind::HalfStrip && !root.contains("component")) {
        auto hs = half_strip_profile(dom.width);
        hs.domain.dim = dom.dim;
        return hs;
    }
    if (!root.contains("component") || !root.at("component").is_array())
        throw Error(ErrorCode::ParseError, "need at least one [[component]]");
    const auto& comps = root.at("component");
    int next_id = 0;
    for (const auto& ct : comps) {
        const std::string where = "component " + std::to_string(next_id);
        const int id = static_cast<int>(num(ct, "id", next_id));
        next_id = id + 1;
        const int dj = static_cast<int>(num(ct, "d_j", id < dom.component_count() ? dom.component_dim(id) : dom.dim - 1));
        const double beta = detail::num_req(ct, "beta", where);
        const double gamma = detail::num_req(ct, "gamma", where);
        const double D = num(ct, "D", 1.0);
        const double rho = num(ct, "rho", 1.0);
        const double nu0 = num(ct, "nu0", 0.25);
        const std::string law = ct.contains("law") ? ct.at("law").get<std::string>() : "blend";
        BoundaryComponent c;
        if (law == "blend") c = make_component(id, dj, beta, gamma, D, rho, nu0);
        else if (law == "power") c = make_power_component(id, dj, beta, gamma, D, rho, nu0);
        else if (law == "strip") {
            const double H = 0.5 * dom.width;
            c = make_component(id, dj, -1.0, gamma, 0.5 * H, rho, nu0);
            c.a = strip_law(H);
            c.D_minus = 0.5 * H;
            c.D_plus = H;
        } else {
            throw Error(ErrorCode::ParseError, where + ": unknown law '" + law + "'");
        }
        c.D_minus = num(ct, "D_minus", c.D_minus);
        c.D_plus = num(ct, "D_plus", c.D_plus);
        c.rho_minus = num(ct, "rho_minus", c.rho_minus);
        c.rho_plus = num(ct, "rho_plus", c.rho_plus);
        c.K = num(ct, "K", c.K);
        c.L = num(ct, "L", c.L);
        p.components.push_back(std::move(c));
    }
    std::sort(p.components.begin(), p.components.end(), [](auto& a, auto& b) { return a.id < b.id; });
    if (root.contains("infinity")) {
        const auto& it = root.at("infinity");
        InfinityRecord inf;
        inf.beta_inf = detail::num_req(it, "beta", "[infinity]");
        inf.L_inf = num(it, "L", 1.0);
        inf.R_cut = num(it, "R", 4.0);
        inf.kappa = num(it, "kappa", 0.0);
        if (it.contains("rho_growth")) {
            const auto g = it.at("rho_growth").get<std::string>();
            if (g == "power") inf.rho_growth = RhoGrowth::Power;
            else if (g == "exp") inf.rho_growth = RhoGrowth::Exp;
            else throw Error(ErrorCode::ParseError, "[infinity] rho_growth must be \"power\" or \"exp\"");
        }
        p.infinity = inf;
    }
    return p;
}

inline CoefficientProfile load_profile(const std::string& path) {
    return profile_from_tree(toml_lite::parse_file(path));
}

inline CoefficientProfile parse_profile(const std::string& toml_text) {
    return profile_from_tree(toml_lite::parse_string(toml_text));
}

}  // namespace confine
