#pragma once

// Finite-volume simulation of d/dt mu = (1/w)(p mu')' on (0, c) under the
// minimal semigroup: a Dirichlet face at t = 0 and, by default, a reflecting
// face at the artificial end c. The weighted mass M(t) = sum mu_i W_i then
// records whether the singular end leaks.

#include <cmath>
#include <functional>
#include <future>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "sturm.hpp"

namespace confine {

enum class FarEnd { Reflecting, Dirichlet };
enum class Scheme { ImplicitEuler, CrankNicolson };

inline const char* to_string(Scheme s) { return s == Scheme::ImplicitEuler ? "ImplicitEuler" : "CrankNicolson"; }

/// Cells [faces[i], faces[i+1]] with faces[0] = 0 and faces.back() = c.
struct FVGrid {
    std::vector<double> faces;
    double h = 0.0;  // nominal (largest) cell width
    FarEnd far_end = FarEnd::Reflecting;

    std::size_t cells() const { return faces.size() - 1; }
    double c() const { return faces.back(); }
    double center(std::size_t i) const { return 0.5 * (faces[i] + faces[i + 1]); }
    double width(std::size_t i) const { return faces[i + 1] - faces[i]; }
};

inline FVGrid uniform_fv_grid(double c, double h, FarEnd far = FarEnd::Reflecting) {
    const auto n = static_cast<std::size_t>(std::llround(c / h));
    if (!(h > 0.0) || n < 8) throw Error(ErrorCode::GridTooCoarse, "uniform grid needs at least 8 cells");
    FVGrid g;
    g.h = c / static_cast<double>(n);
    g.far_end = far;
    g.faces.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i) g.faces[i] = c * static_cast<double>(i) / static_cast<double>(n);
    return g;
}

/// Width h away from 0; below the depth where a cell of width h has ratio
/// `ratio` to its inner neighbour, widths shrink geometrically, and the
/// innermost cell is [0, t] with t <= h^2.
inline FVGrid graded_fv_grid(double c, double h, FarEnd far = FarEnd::Reflecting, double ratio = std::exp2(0.125)) {
    if (!(h > 0.0) || c / h < 8.0) throw Error(ErrorCode::GridTooCoarse, "graded grid needs h <= c/8");
    if (!(ratio > 1.0)) throw Error(ErrorCode::InvalidArgument, "grading ratio must exceed 1");
    const double shrink = 1.0 - 1.0 / ratio;  // inner face = x (1 - shrink)
    const double floor = h * h;
    std::vector<double> rev{c};
    double x = c;
    while (x > floor) {
        x -= std::min(h, shrink * x);
        rev.push_back(std::max(x, 0.0));
        if (x <= 0.0) break;
    }
    if (rev.back() > 0.0) rev.push_back(0.0);
    FVGrid g;
    g.h = h;
    g.far_end = far;
    g.faces.assign(rev.rbegin(), rev.rend());
    return g;
}

/// K symmetric (conductances), W the cell weights: the generator is -W^{-1} K.
struct Generator {
    Eigen::SparseMatrix<double> K;
    Eigen::VectorXd W;

    /// The generator L = -W^{-1} K as an explicit sparse matrix.
    Eigen::SparseMatrix<double> matrix() const {
        Eigen::SparseMatrix<double> L = -(W.cwiseInverse().asDiagonal() * K);
        return L;
    }
    Eigen::VectorXd apply(const Eigen::VectorXd& v) const { return -(K * v).cwiseQuotient(W); }
    /// <<u, v>> = sum u_i v_i W_i.
    double inner(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const { return (u.cwiseProduct(v)).dot(W); }
};

namespace detail {

inline double cell_weight(const SLProblem& sl, double lo, double hi) {
    if (lo > 0.0) return shell_rule::integrate(sl.w, lo, hi);
    const auto dy = dyadic_integral_from_zero(sl.w, hi, 50);
    if (!dy.finite()) throw Error(ErrorCode::PreconditionViolated, "weight is not integrable at 0: total mass is infinite");
    return dy.value();
}

}  // namespace detail

/// Interior faces use p at the face itself over the centre-to-centre distance;
/// boundary faces use p midway between the face and the adjacent centre.
inline Generator assemble_generator(const SLProblem& sl, const FVGrid& g) {
    const std::size_t n = g.cells();
    if (n < 8) throw Error(ErrorCode::GridTooCoarse, "need at least 8 cells");
    if (std::abs(g.c() - sl.c) > 1e-12 * sl.c) throw Error(ErrorCode::InvalidArgument, "grid and problem disagree on c");
    Generator G;
    G.W.resize(static_cast<Eigen::Index>(n));
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(3 * n);
    auto add = [&](std::size_t i, std::size_t j, double v) {
        trip.emplace_back(static_cast<int>(i), static_cast<int>(j), v);
    };
    for (std::size_t i = 0; i < n; ++i) {
        const double wi = detail::cell_weight(sl, g.faces[i], g.faces[i + 1]);
        if (!(wi > 0.0 && std::isfinite(wi))) throw Error(ErrorCode::InvalidArgument, "cell weight must be positive");
        G.W[static_cast<Eigen::Index>(i)] = wi;
    }
    const double x0 = g.center(0);
    const double k0 = sl.p(0.5 * x0) / x0;  // Dirichlet face at 0
    add(0, 0, k0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double k = sl.p(g.faces[i + 1]) / (g.center(i + 1) - g.center(i));
        if (!(k > 0.0 && std::isfinite(k))) throw Error(ErrorCode::InvalidArgument, "face coefficient must be positive");
        add(i, i, k);
        add(i + 1, i + 1, k);
        add(i, i + 1, -k);
        add(i + 1, i, -k);
    }
    if (g.far_end == FarEnd::Dirichlet) {
        const double xc = g.center(n - 1), c = g.c();
        add(n - 1, n - 1, sl.p(0.5 * (xc + c)) / (c - xc));
    }
    G.K.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    G.K.setFromTriplets(trip.begin(), trip.end());
    return G;
}

struct MassTrace {
    std::vector<double> times;
    std::vector<double> mass;
    Scheme scheme = Scheme::ImplicitEuler;
    double min_value = 0.0;   // smallest mu_i seen over the run
    bool undershoot = false;  // Crank-Nicolson produced negative values

    double retention() const { return mass.front() > 0.0 ? mass.back() / mass.front() : 1.0; }
    /// M(t_{k+1}) <= M(t_k) + tol M(0) for every step.
    bool monotone(double tol = 1e-12) const {
        for (std::size_t k = 1; k < mass.size(); ++k)
            if (mass[k] > mass[k - 1] + tol * mass.front()) return false;
        return true;
    }
};

inline void write_trace_csv(std::ostream& os, const MassTrace& tr) {
    os << "t,M\n";
    os.precision(17);
    for (std::size_t k = 0; k < tr.times.size(); ++k) os << tr.times[k] << ',' << tr.mass[k] << '\n';
}

struct RunOptions {
    double T = 0.25;
    int steps = 1024;  // dt = T / steps
    Scheme scheme = Scheme::ImplicitEuler;
};

/// mu0 is sampled at cell centres.
inline MassTrace run(const SLProblem& sl, const FVGrid& g, const std::function<double(double)>& mu0,
                     const RunOptions& opt = {}) {
    if (!(opt.T > 0.0) || opt.steps < 1) throw Error(ErrorCode::InvalidArgument, "need T > 0 and at least one step");
    const Generator G = assemble_generator(sl, g);
    const auto n = static_cast<Eigen::Index>(g.cells());
    Eigen::VectorXd mu(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        mu[i] = mu0(g.center(static_cast<std::size_t>(i)));
        if (mu[i] < 0.0) throw Error(ErrorCode::InvalidArgument, "initial density must be nonnegative");
    }
    const double dt = opt.T / opt.steps;
    const double theta = opt.scheme == Scheme::ImplicitEuler ? 1.0 : 0.5;
    Eigen::SparseMatrix<double> lhs = theta * dt * G.K;
    Eigen::SparseMatrix<double> rhs_op = -(1.0 - theta) * dt * G.K;
    Eigen::SparseMatrix<double> Wd(n, n);
    Wd.reserve(Eigen::VectorXi::Constant(n, 1));
    for (Eigen::Index i = 0; i < n; ++i) Wd.insert(i, i) = G.W[i];
    lhs += Wd;
    rhs_op += Wd;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(lhs);
    if (solver.info() != Eigen::Success) throw Error(ErrorCode::LinearSolveFailure, "factorization failed");

    MassTrace tr;
    tr.scheme = opt.scheme;
    tr.times.reserve(static_cast<std::size_t>(opt.steps) + 1);
    tr.mass.reserve(static_cast<std::size_t>(opt.steps) + 1);
    tr.times.push_back(0.0);
    tr.mass.push_back(mu.dot(G.W));
    tr.min_value = n > 0 ? mu.minCoeff() : 0.0;
    for (int k = 1; k <= opt.steps; ++k) {
        mu = solver.solve(rhs_op * mu);
        if (solver.info() != Eigen::Success || !mu.allFinite())
            throw Error(ErrorCode::LinearSolveFailure, "solve failed at step " + std::to_string(k));
        tr.times.push_back(k * dt);
        tr.mass.push_back(mu.dot(G.W));
        tr.min_value = std::min(tr.min_value, mu.minCoeff());
    }
    tr.undershoot = opt.scheme == Scheme::CrankNicolson && tr.min_value < 0.0;
    return tr;
}

struct RefinementStudy {
    std::vector<double> h;
    std::vector<double> retention;
    std::vector<double> delta;  // |r_k - r_{k-1}|, NaN for the first grid
    double extrapolated = 0.0;
    double order = 0.0;       // observed order from the last three grids
    bool converging = false;  // |delta| decreasing
    bool non_monotone = false;
};

/// Grids h, h/2, h/4, ... (at least three); each grid runs on its own thread.
/// The limit is Richardson-extrapolated from the last three retentions.
inline RefinementStudy refine_study(const SLProblem& sl, const std::vector<double>& hs,
                                    const std::function<double(double)>& mu0, const RunOptions& opt = {},
                                    FarEnd far = FarEnd::Reflecting) {
    if (hs.size() < 3) throw Error(ErrorCode::InvalidArgument, "refinement study needs at least three grids");
    for (std::size_t k = 1; k < hs.size(); ++k)
        if (std::abs(hs[k] * 2.0 - hs[k - 1]) > 1e-12 * hs[k - 1])
            throw Error(ErrorCode::InvalidArgument, "each grid must halve the previous spacing");
    std::vector<std::future<double>> jobs;
    for (double h : hs)
        jobs.push_back(std::async(std::launch::async, [&, h] { return run(sl, graded_fv_grid(sl.c, h, far), mu0, opt).retention(); }));
    RefinementStudy s;
    s.h = hs;
    for (auto& j : jobs) s.retention.push_back(j.get());
    s.delta.push_back(std::nan(""));
    for (std::size_t k = 1; k < hs.size(); ++k) s.delta.push_back(std::abs(s.retention[k] - s.retention[k - 1]));
    s.converging = true;
    for (std::size_t k = 2; k < hs.size(); ++k)
        if (!(s.delta[k] <= s.delta[k - 1])) s.converging = false;
    const std::size_t m = hs.size();
    const double d1 = s.retention[m - 2] - s.retention[m - 3], d2 = s.retention[m - 1] - s.retention[m - 2];
    s.non_monotone = d1 * d2 < 0.0 || !s.converging;
    if (d2 == 0.0) {
        s.order = kInf;
        s.extrapolated = s.retention.back();
    } else {
        s.order = (d1 != 0.0 && d1 * d2 > 0.0) ? std::log2(d1 / d2) : 1.0;
        const double q = std::clamp(s.order, 0.25, 4.0);
        s.extrapolated = s.retention.back() + d2 / (std::exp2(q) - 1.0);
    }
    return s;
}

inline void write_refinement_csv(std::ostream& os, const RefinementStudy& s) {
    os << "h,retention,delta\n";
    os.precision(17);
    for (std::size_t k = 0; k < s.h.size(); ++k) {
        os << s.h[k] << ',' << s.retention[k] << ',';
        if (!std::isnan(s.delta[k])) os << s.delta[k];
        os << '\n';
    }
}

}  // namespace confine
