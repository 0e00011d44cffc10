#pragma once

// Command layer behind confine_lab. Every command reads a RunConfig, writes its
// files under the output directory and returns the process exit code:
// 0 ok, 2 bad input, 3 invariant violation, 4 verdict contradicted by an oracle.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "criteria.hpp"
#include "fpsim.hpp"
#include "geometry.hpp"
#include "profiles.hpp"
#include "quadform.hpp"
#include "sigma.hpp"
#include "sturm.hpp"
#include "toml_lite.hpp"

namespace confine::cli {

enum Exit : int { Ok = 0, InputError = 2, InvariantError = 3, Contradiction = 4 };

/// Shortest decimal that round-trips.
inline std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, r.ptr};
}

/// "lo:hi:step" (inclusive) or a single value.
struct Range {
    double lo = 0.0, hi = 0.0, step = 1.0;

    std::vector<double> values() const {
        std::vector<double> out;
        if (!(step > 0.0) || hi < lo) return out;
        const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
        for (long k = 0; k <= n; ++k) out.push_back(std::round((lo + static_cast<double>(k) * step) * 1e12) / 1e12);
        return out;
    }
};

inline double parse_double(const std::string& s, const std::string& what) {
    double v = 0.0;
    const auto* b = s.data();
    const auto r = std::from_chars(b, b + s.size(), v);
    if (r.ec != std::errc{} || r.ptr != b + s.size()) throw Error(ErrorCode::ParseError, what + ": not a number '" + s + "'");
    return v;
}

inline Range parse_range(const std::string& s) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.size() == 1) {
        const double v = parse_double(parts[0], "range");
        return {v, v, 1.0};
    }
    if (parts.size() != 3) throw Error(ErrorCode::ParseError, "range must be lo:hi:step, got '" + s + "'");
    return {parse_double(parts[0], "range"), parse_double(parts[1], "range"), parse_double(parts[2], "range")};
}

/// Overridable defaults, set with --tol key=value.
inline const std::map<std::string, double>& default_tolerances() {
    static const std::map<std::string, double> d = {
        {"E", -1.0},       // spectral parameter of the Weyl oracle
        {"levels", 60},    // dyadic levels of the 1D oracles
        {"T", 0.25},       // simulated time
        {"steps", 1024},   // time steps
        {"h0", 1.0 / 256}, // coarsest simulation spacing
        {"leak", 0.01},    // 1 - retention above this counts as leakage
        {"samples", 500},  // Hardy test functions
    };
    return d;
}

struct RunConfig {
    std::string command;
    std::string profile;
    std::string out = "out";
    std::optional<std::string> beta, gamma;
    int grid_levels = 0;  // 0: command default
    std::uint64_t seed = 0xC0FFEE;
    std::vector<std::string> tol;  // key=value
    int component = 0;
    bool simulate = false;

    std::map<std::string, double> tolerances() const {
        auto t = default_tolerances();
        for (const auto& kv : tol) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw Error(ErrorCode::ParseError, "--tol expects key=value, got '" + kv + "'");
            const std::string k = kv.substr(0, eq);
            if (!t.count(k)) throw Error(ErrorCode::ParseError, "unknown tolerance '" + k + "'");
            t[k] = parse_double(kv.substr(eq + 1), "--tol " + k);
        }
        return t;
    }
};

/// CONFINE_LAB_WORKERS, else the hardware concurrency.
inline unsigned worker_count() {
    if (const char* env = std::getenv("CONFINE_LAB_WORKERS")) {
        const int n = std::atoi(env);
        if (n > 0) return static_cast<unsigned>(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace detail {

inline std::filesystem::path out_dir(const RunConfig& cfg) {
    std::error_code ec;
    std::filesystem::create_directories(cfg.out, ec);
    if (ec || !std::filesystem::is_directory(cfg.out))
        throw Error(ErrorCode::InvalidArgument, "output directory '" + cfg.out + "' is not writable");
    return cfg.out;
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
    f << text;
}

inline int exit_code(const Error& e) {
    switch (e.code()) {
        case ErrorCode::ParseError:
        case ErrorCode::InvalidArgument: return InputError;
        default: return InvariantError;
    }
}

struct LoadedProfile {
    CoefficientProfile profile;
    nlohmann::json tree;
};

inline LoadedProfile load(const RunConfig& cfg) {
    if (cfg.profile.empty()) throw Error(ErrorCode::ParseError, cfg.command + " needs --profile");
    auto tree = toml_lite::parse_file(cfg.profile);
    return {profile_from_tree(tree), tree};
}

/// Exit 3 with the diagnostics when the profile breaks an invariant.
inline bool report_diagnostics(const CoefficientProfile& p, std::ostream& err) {
    const auto diags = validate(p);
    for (const auto& d : diags) err << "invalid profile: " << d.code << ": " << d.message << '\n';
    return !diags.empty();
}

/// [sigma] family = "pure_log" | "log_log", sigma, a0; PureLog(1) by default.
inline SigmaSpec sigma_from_tree(const nlohmann::json& tree) {
    if (!tree.contains("sigma")) return SigmaSpec::pure_log(1.0);
    const auto& s = tree.at("sigma");
    const std::string fam = s.value("family", std::string("pure_log"));
    const double a0 = s.value("a0", 1.0);
    if (fam == "pure_log") return SigmaSpec::pure_log(s.value("sigma", 1.0), a0);
    if (fam == "log_log") return SigmaSpec::log_log_corrected(a0);
    throw Error(ErrorCode::ParseError, "[sigma] family must be \"pure_log\" or \"log_log\"");
}

/// [split] omega_exponent s, alpha: omega = delta^s, rho_tilde = rho / omega.
inline WeightSplit split_from_tree(const CoefficientProfile& p, const nlohmann::json& tree) {
    double s = 0.0, alpha = 0.0;
    if (tree.contains("split")) {
        s = tree.at("split").value("omega_exponent", 0.0);
        alpha = tree.at("split").value("alpha", 0.0);
    }
    WeightSplit w;
    w.alpha = alpha;
    const DomainSpec dom = p.domain;
    w.omega = [dom, s](const Point& x) { return s == 0.0 ? 1.0 : std::pow(boundary_distance(dom, x).delta, s); };
    w.rho_tilde = [p, dom, s](const Point& x) {
        const double om = s == 0.0 ? 1.0 : std::pow(boundary_distance(dom, x).delta, s);
        return evaluate_weight(p, x) / om;
    };
    return w;
}

inline nlohmann::json not_applicable(const std::string& theorem, const std::string& why) {
    return {{"theorem", theorem}, {"outcome", "NotApplicable"}, {"reason", why}};
}

inline double oracle_cut(const CoefficientProfile& p, int j) {
    return std::min({p.domain.reach(j), p.component(j).nu0, 1.0});
}

inline OracleOptions oracle_options(const std::map<std::string, double>& tol) {
    OracleOptions o;
    o.levels = static_cast<int>(tol.at("levels"));
    return o;
}

}  // namespace detail

// ---- classify ------------------------------------------------------------------------

inline nlohmann::json classify_profile(const CoefficientProfile& p, const nlohmann::json& tree) {
    nlohmann::json verdicts = nlohmann::json::array();
    auto attempt = [&](const std::string& theorem, auto&& fn) {
        try {
            verdicts.push_back(fn().to_json());
        } catch (const Error& e) {
            if (e.code() == ErrorCode::UnsupportedDomain || e.code() == ErrorCode::MissingInfinityRecord)
                verdicts.push_back(detail::not_applicable(theorem, e.what()));
            else
                throw;
        }
    };
    const bool radial_unbounded =
        p.domain.kind == DomainKind::ExteriorDomain || p.domain.kind == DomainKind::PuncturedSpace;
    if (radial_unbounded) {
        attempt("infinity_esa", [&] { return classify_at_infinity(p, Question::ESA); });
        attempt("infinity_sc", [&] { return classify_at_infinity(p, Question::SC); });
    } else {
        attempt("collar_esa", [&] { return classify_esa(p); });
        attempt("collar_sc", [&] { return classify_sc(p); });
    }
    const auto sigma = detail::sigma_from_tree(tree);
    attempt("metric_esa", [&] { return classify_esa_metric(p, sigma); });
    attempt("metric_sc", [&] { return classify_sc_metric(p, detail::split_from_tree(p, tree)); });

    const auto mc = classify_manifold(p);
    const auto A = check_assumption_A(p);
    nlohmann::json comp = nlohmann::json::object();
    for (const auto& [id, ok] : mc.per_component_complete) comp[std::to_string(id)] = ok;
    nlohmann::json geo = {{"case", to_string(mc.metric_case)},
                          {"per_component_complete", comp},
                          {"diam_estimate", fmt(mc.diam_estimate)},
                          {"assumption_A", {{"status", to_string(A.status)}, {"witness", A.witness}}}};
    if (mc.infinity_complete) geo["infinity_complete"] = *mc.infinity_complete;
    return {{"domain", to_string(p.domain.kind)}, {"dim", p.domain.dim}, {"geometry", geo}, {"verdicts", verdicts}};
}

inline int cmd_classify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto lp = detail::load(cfg);
    if (detail::report_diagnostics(lp.profile, err)) return InvariantError;
    auto doc = classify_profile(lp.profile, lp.tree);
    doc["profile"] = cfg.profile;
    detail::write_file(detail::out_dir(cfg) / "verdicts.json", doc.dump(2) + "\n");
    out << "geometry: " << doc["geometry"]["case"].get<std::string>()
        << ", assumption A " << doc["geometry"]["assumption_A"]["status"].get<std::string>() << '\n';
    for (const auto& v : doc["verdicts"]) {
        out << v["theorem"].get<std::string>() << ": " << v["outcome"].get<std::string>() << '\n';
    }
    return Ok;
}

// ---- oracle --------------------------------------------------------------------------

inline nlohmann::json oracle_component(const CoefficientProfile& p, int j, const std::map<std::string, double>& tol) {
    const double c = detail::oracle_cut(p, j);
    const SLProblem sl = reduce_collar(p, j, c);
    const auto opt = detail::oracle_options(tol);
    const auto f = feller_classify(sl, Endpoint::Zero, opt);
    const auto w = weyl_classify(sl, Endpoint::Zero, tol.at("E"), opt);
    auto iv = [](const IntegralValue& v) {
        return nlohmann::json{{"status", to_string(v.status)}, {"value", fmt(v.value)}};
    };
    nlohmann::json r = {{"component", j},
                        {"c", c},
                        {"feller", to_string(f.feller)},
                        {"sigma_integral", iv(f.sigma_integral)},
                        {"n_integral", iv(f.n_integral)},
                        {"weyl", to_string(w)}};
    r["conservative"] = f.feller == FellerClass::Inconclusive ? nlohmann::json(nullptr) : nlohmann::json(!f.accessible());
    r["esa_1d"] = w == WeylClass::Inconclusive ? nlohmann::json(nullptr) : nlohmann::json(w == WeylClass::LimitPoint);
    return r;
}

inline int cmd_oracle(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto lp = detail::load(cfg);
    if (detail::report_diagnostics(lp.profile, err)) return InvariantError;
    const auto tol = cfg.tolerances();
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : lp.profile.components) {
        arr.push_back(oracle_component(lp.profile, c.id, tol));
        const auto& r = arr.back();
        out << "component " << c.id << ": feller " << r["feller"].get<std::string>() << ", weyl "
            << r["weyl"].get<std::string>() << '\n';
    }
    detail::write_file(detail::out_dir(cfg) / "oracles.json",
                       nlohmann::json{{"profile", cfg.profile}, {"E", tol.at("E")}, {"components", arr}}.dump(2) + "\n");
    return Ok;
}

// ---- simulate ------------------------------------------------------------------------

inline int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto lp = detail::load(cfg);
    const auto& p = lp.profile;
    if (detail::report_diagnostics(p, err)) return InvariantError;
    const auto tol = cfg.tolerances();
    const int grids = cfg.grid_levels > 0 ? cfg.grid_levels : 5;
    if (grids < 3) throw Error(ErrorCode::InvalidArgument, "simulate needs --grid-levels >= 3");
    const double c = std::min(p.domain.reach(cfg.component), 1.0);
    const SLProblem sl = reduce_collar(p, cfg.component, c);
    std::vector<double> hs;
    for (int k = 0; k < grids; ++k) hs.push_back(std::ldexp(tol.at("h0") * c, -k));
    RunOptions opt;
    opt.T = tol.at("T");
    opt.steps = static_cast<int>(tol.at("steps"));
    auto one = [](double) { return 1.0; };
    const auto study = refine_study(sl, hs, one, opt);
    const auto trace = run(sl, graded_fv_grid(c, hs.back()), one, opt);
    const auto dir = detail::out_dir(cfg);
    std::ostringstream rs, ts;
    write_refinement_csv(rs, study);
    write_trace_csv(ts, trace);
    detail::write_file(dir / "refinement.csv", rs.str());
    detail::write_file(dir / "trace.csv", ts.str());
    const bool leaks = 1.0 - study.extrapolated > tol.at("leak");
    nlohmann::json doc = {{"profile", cfg.profile},
                          {"component", cfg.component},
                          {"T", opt.T},
                          {"extrapolated_retention", study.extrapolated},
                          {"observed_order", fmt(study.order)},
                          {"converging", study.converging},
                          {"non_monotone_refinement", study.non_monotone},
                          {"mass_monotone", trace.monotone()},
                          {"leaks", leaks}};
    detail::write_file(dir / "simulate.json", doc.dump(2) + "\n");
    out << "extrapolated retention " << fmt(study.extrapolated) << (leaks ? " (leaks)" : " (conserved)") << '\n';
    if (!trace.monotone()) {
        err << "mass increased during an implicit Euler run\n";
        return InvariantError;
    }
    return Ok;
}

// ---- hardy ---------------------------------------------------------------------------

inline int cmd_hardy(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto lp = detail::load(cfg);
    const auto& p = lp.profile;
    if (detail::report_diagnostics(p, err)) return InvariantError;
    const auto tol = cfg.tolerances();
    const double c = 0.9 * std::min(p.domain.reach(cfg.component), 1.0);
    const auto grid = graded_grid(c, cfg.grid_levels > 0 ? cfg.grid_levels : 30, 8);
    const auto hc = hardy_inequality_check(p, cfg.component, grid, static_cast<int>(tol.at("samples")), cfg.seed);
    const auto& k = hc.constants;
    nlohmann::json doc = {{"profile", cfg.profile},
                          {"component", cfg.component},
                          {"seed", cfg.seed},
                          {"samples", hc.samples},
                          {"min_slack", hc.min_slack},
                          {"ok", hc.min_slack >= -1e-8},
                          {"constants",
                           {{"kappa", k.kappa}, {"h_j", k.h_j}, {"nu1", k.nu1}, {"nu2", fmt(k.nu2)}, {"nu3", k.nu3},
                            {"C1", k.C1}, {"C2", k.C2}, {"C3", k.C3}, {"coefficient", k.coefficient}}}};
    detail::write_file(detail::out_dir(cfg) / "hardy.json", doc.dump(2) + "\n");
    out << "min slack " << fmt(hc.min_slack) << " over " << hc.samples << " samples\n";
    return Ok;
}

// ---- sweep ---------------------------------------------------------------------------

struct SweepRow {
    double beta = 0.0, gamma = 0.0;
    int d = 1, d_j = 0;
    std::string feller, weyl, criteria_sc, criteria_esa;
    std::optional<double> retention;
    std::string error;
};

/// Codimension-one normal model (t^beta, t^gamma) on (0, 1).
inline SweepRow sweep_row(double beta, double gamma, const std::map<std::string, double>& tol, bool simulate) {
    SweepRow r;
    r.beta = beta;
    r.gamma = gamma;
    try {
        const auto p = uniform_profile(DomainSpec::interval(1.0), beta, gamma);
        r.criteria_sc = to_string(classify_sc(p).outcome);
        r.criteria_esa = to_string(classify_esa(p).outcome);
        const auto comp = make_power_component(0, 0, beta, gamma);
        const SLProblem sl = reduce_normal_model(comp, 1, 1.0);
        const auto opt = detail::oracle_options(tol);
        r.feller = to_string(feller_classify(sl, Endpoint::Zero, opt).feller);
        r.weyl = to_string(weyl_classify(sl, Endpoint::Zero, tol.at("E"), opt));
        if (simulate) {
            RunOptions ro;
            ro.T = tol.at("T");
            ro.steps = static_cast<int>(tol.at("steps"));
            std::vector<double> hs;
            for (int k = 0; k < 5; ++k) hs.push_back(std::ldexp(tol.at("h0"), -k));
            r.retention = refine_study(sl, hs, [](double) { return 1.0; }, ro).extrapolated;
        }
    } catch (const std::exception& e) {
        r.error = e.what();
    }
    return r;
}

inline std::string sweep_header(bool simulate) {
    return std::string("beta,gamma,d,d_j,feller_class,weyl_class,criteria_sc,criteria_esa") +
           (simulate ? ",retention" : "") + "\n";
}

inline std::string sweep_line(const SweepRow& r, bool simulate) {
    auto field = [&](const std::string& s) { return r.error.empty() ? s : std::string("Error"); };
    std::string line = fmt(r.beta) + "," + fmt(r.gamma) + "," + std::to_string(r.d) + "," + std::to_string(r.d_j) + "," +
                       field(r.feller) + "," + field(r.weyl) + "," + field(r.criteria_sc) + "," + field(r.criteria_esa);
    if (simulate) line += "," + (r.retention ? fmt(*r.retention) : std::string());
    return line + "\n";
}

/// Rows in (beta, gamma) order, computed on a bounded worker pool.
inline std::vector<SweepRow> run_sweep(const std::vector<double>& betas, const std::vector<double>& gammas,
                                       const std::map<std::string, double>& tol, bool simulate, unsigned workers) {
    std::vector<std::pair<double, double>> jobs;
    for (double b : betas)
        for (double g : gammas) jobs.emplace_back(b, g);
    std::vector<SweepRow> rows(jobs.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) rows[i] = sweep_row(jobs[i].first, jobs[i].second, tol, simulate);
    };
    std::vector<std::thread> pool;
    const unsigned n = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(jobs.size())));
    for (unsigned k = 0; k < n; ++k) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    return rows;
}

inline int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    if (!cfg.beta || !cfg.gamma) {
        err << "sweep needs --beta and --gamma\n";
        return InputError;
    }
    const auto betas = parse_range(*cfg.beta).values();
    const auto gammas = parse_range(*cfg.gamma).values();
    if (betas.empty() || gammas.empty()) {
        err << "empty sweep grid\n";
        return InputError;
    }
    const auto tol = cfg.tolerances();
    const auto rows = run_sweep(betas, gammas, tol, cfg.simulate, worker_count());
    std::string csv = sweep_header(cfg.simulate);
    int failed = 0;
    for (const auto& r : rows) {
        csv += sweep_line(r, cfg.simulate);
        if (!r.error.empty()) {
            ++failed;
            err << "row beta=" << fmt(r.beta) << " gamma=" << fmt(r.gamma) << ": " << r.error << '\n';
        }
    }
    detail::write_file(detail::out_dir(cfg) / "sweep.csv", csv);
    out << rows.size() << " rows written to " << (std::filesystem::path(cfg.out) / "sweep.csv").string() << '\n';
    return failed ? InvariantError : Ok;
}

// ---- report --------------------------------------------------------------------------

struct ReportLine {
    std::string beta, gamma, criteria_sc, oracle_sc, criteria_esa, oracle_esa;
    bool contradiction = false;
};

/// "conserved" / "leaks" / "unknown" from a Feller class and an optional retention.
inline std::string oracle_sc(const std::string& feller, const std::string& retention, double leak) {
    if (!retention.empty()) {
        const double r = parse_double(retention, "retention");
        if (1.0 - r > leak) return "leaks";
    }
    if (feller == "Regular" || feller == "Exit") return "leaks";
    if (feller == "Entrance" || feller == "Natural") return "conserved";
    return "unknown";
}

inline std::string oracle_esa(const std::string& weyl) {
    if (weyl == "LimitPoint") return "esa";
    if (weyl == "LimitCircle") return "not_esa";
    return "unknown";
}

inline std::vector<ReportLine> cross_reference(std::istream& csv, double leak) {
    std::string header;
    if (!std::getline(csv, header)) throw Error(ErrorCode::ParseError, "sweep.csv is empty");
    std::vector<std::string> cols;
    {
        std::stringstream ss(header);
        std::string c;
        while (std::getline(ss, c, ',')) cols.push_back(c);
    }
    auto index = [&](const std::string& name) -> std::optional<std::size_t> {
        const auto it = std::find(cols.begin(), cols.end(), name);
        if (it == cols.end()) return std::nullopt;
        return static_cast<std::size_t>(it - cols.begin());
    };
    for (const char* need : {"beta", "gamma", "feller_class", "weyl_class", "criteria_sc", "criteria_esa"})
        if (!index(need)) throw Error(ErrorCode::ParseError, std::string("sweep.csv lacks column ") + need);
    const auto ret = index("retention");
    std::vector<ReportLine> out;
    std::string line;
    while (std::getline(csv, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) f.push_back(c);
        if (f.size() < cols.size()) f.resize(cols.size());
        ReportLine r;
        r.beta = f[*index("beta")];
        r.gamma = f[*index("gamma")];
        r.criteria_sc = f[*index("criteria_sc")];
        r.criteria_esa = f[*index("criteria_esa")];
        r.oracle_sc = oracle_sc(f[*index("feller_class")], ret ? f[*ret] : std::string(), leak);
        r.oracle_esa = oracle_esa(f[*index("weyl_class")]);
        r.contradiction = (r.criteria_sc == "Proven" && r.oracle_sc == "leaks") ||
                          (r.criteria_esa == "Proven" && r.oracle_esa == "not_esa");
        out.push_back(r);
    }
    return out;
}

inline int cmd_report(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto path = std::filesystem::path(cfg.out) / "sweep.csv";
    std::ifstream in(path);
    if (!in) {
        err << "missing input " << path.string() << " (run sweep first)\n";
        return InputError;
    }
    const auto tol = cfg.tolerances();
    const auto lines = cross_reference(in, tol.at("leak"));
    std::ostringstream txt, csv;
    csv << "beta,gamma,criteria_sc,oracle_sc,criteria_esa,oracle_esa,contradiction\n";
    txt << std::left << std::setw(8) << "beta" << std::setw(8) << "gamma" << std::setw(14) << "criteria_sc"
        << std::setw(11) << "oracle_sc" << std::setw(14) << "criteria_esa" << std::setw(11) << "oracle_esa" << "flag\n";
    int bad = 0, sc_proven = 0, esa_proven = 0;
    for (const auto& r : lines) {
        bad += r.contradiction;
        sc_proven += r.criteria_sc == "Proven";
        esa_proven += r.criteria_esa == "Proven";
        csv << r.beta << ',' << r.gamma << ',' << r.criteria_sc << ',' << r.oracle_sc << ',' << r.criteria_esa << ','
            << r.oracle_esa << ',' << (r.contradiction ? 1 : 0) << '\n';
        txt << std::setw(8) << r.beta << std::setw(8) << r.gamma << std::setw(14) << r.criteria_sc << std::setw(11)
            << r.oracle_sc << std::setw(14) << r.criteria_esa << std::setw(11) << r.oracle_esa
            << (r.contradiction ? "CONTRADICTION" : "") << '\n';
    }
    std::ostringstream summary;
    summary << lines.size() << " rows, " << sc_proven << " SC Proven, " << esa_proven << " ESA Proven, " << bad
            << " contradictions\n";
    txt << '\n' << summary.str();
    const auto dir = detail::out_dir(cfg);
    detail::write_file(dir / "report.txt", txt.str());
    detail::write_file(dir / "report.csv", csv.str());
    out << summary.str();
    if (bad) {
        for (const auto& r : lines)
            if (r.contradiction)
                err << "contradiction at beta=" << r.beta << " gamma=" << r.gamma << ": SC " << r.criteria_sc << "/"
                    << r.oracle_sc << ", ESA " << r.criteria_esa << "/" << r.oracle_esa << '\n';
        return Contradiction;
    }
    return Ok;
}

// ---- dispatch ------------------------------------------------------------------------

inline const std::vector<std::string>& commands() {
    static const std::vector<std::string> c = {"classify", "oracle", "simulate", "hardy", "sweep", "report"};
    return c;
}

/// Runs one command; library errors become exit codes with the message on `err`.
inline int dispatch(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        cfg.tolerances();  // reject bad --tol before doing any work
        if (cfg.command == "classify") return cmd_classify(cfg, out, err);
        if (cfg.command == "oracle") return cmd_oracle(cfg, out, err);
        if (cfg.command == "simulate") return cmd_simulate(cfg, out, err);
        if (cfg.command == "hardy") return cmd_hardy(cfg, out, err);
        if (cfg.command == "sweep") return cmd_sweep(cfg, out, err);
        if (cfg.command == "report") return cmd_report(cfg, out, err);
        err << "unknown command '" << cfg.command << "'\n";
        return InputError;
    } catch (const Error& e) {
        err << e.what() << '\n';
        return detail::exit_code(e);
    } catch (const nlohmann::json::exception& e) {
        err << "ParseError: " << e.what() << '\n';
        return InputError;
    }
}

}  // namespace confine::cli
