#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include <confine/cli.hpp>

using namespace confine;
using namespace confine::cli;
namespace fs = std::filesystem;

namespace {
std::string profile_path(const std::string& name) {
    return std::string(CONFINE_SOURCE_DIR) + "/profiles/" + name + ".toml";
}

fs::path scratch_dir(const std::string& tag) {
    static std::mt19937_64 rng(std::random_device{}());
    const auto dir = fs::temp_directory_path() / ("confine_test_" + tag + "_" + std::to_string(rng()));
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

struct Result {
    int code;
    std::string out, err;
};

Result run_cmd(RunConfig cfg) {
    std::ostringstream out, err;
    const int code = dispatch(cfg, out, err);
    return {code, out.str(), err.str()};
}

RunConfig config(const std::string& command, const fs::path& out, const std::string& profile = "") {
    RunConfig c;
    c.command = command;
    c.out = out.string();
    if (!profile.empty()) c.profile = profile_path(profile);
    return c;
}

nlohmann::json verdict(const nlohmann::json& doc, const std::string& theorem_prefix) {
    for (const auto& v : doc.at("verdicts"))
        if (v.at("theorem").get<std::string>().rfind(theorem_prefix, 0) == 0) return v;
    return {};
}

int run_exe(const std::string& args) {
    const std::string cmd = std::string(CONFINE_LAB_EXE) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}
}  // namespace

TEST(Ranges, Parse) {
    EXPECT_EQ(parse_range("0:3:0.25").values().size(), 13u);
    EXPECT_EQ(parse_range("-2:4:0.5").values().front(), -2.0);
    EXPECT_EQ(parse_range("-2:4:0.5").values().back(), 4.0);
    EXPECT_EQ(parse_range("1.5").values(), std::vector<double>{1.5});
    EXPECT_TRUE(parse_range("3:0:1").values().empty());
    EXPECT_TRUE(parse_range("0:1:0").values().empty());
    EXPECT_THROW(parse_range("0:1"), Error);
    EXPECT_THROW(parse_range("a:b:c"), Error);
    EXPECT_EQ(fmt(0.1), "0.1");
    EXPECT_EQ(fmt(-2.0), "-2");
}

TEST(Tolerances, Overrides) {
    RunConfig c;
    c.tol = {"leak=0.05", "steps=16"};
    const auto t = c.tolerances();
    EXPECT_EQ(t.at("leak"), 0.05);
    EXPECT_EQ(t.at("steps"), 16.0);
    EXPECT_EQ(t.at("T"), 0.25);
    c.tol = {"nonsense=1"};
    EXPECT_THROW(c.tolerances(), Error);
    c.tol = {"leak"};
    EXPECT_THROW(c.tolerances(), Error);
}

TEST(Classify, ShippedProfiles) {
    const auto dir = scratch_dir("classify");
    auto r = run_cmd(config("classify", dir / "a", "ball_beta1p5"));
    ASSERT_EQ(r.code, Ok) << r.err;
    auto doc = nlohmann::json::parse(slurp(dir / "a" / "verdicts.json"));
    EXPECT_EQ(verdict(doc, "collar_esa").at("outcome"), "Proven");
    EXPECT_EQ(verdict(doc, "collar_sc").at("outcome"), "Proven");

    r = run_cmd(config("classify", dir / "b", "ball_gamma1"));
    ASSERT_EQ(r.code, Ok) << r.err;
    doc = nlohmann::json::parse(slurp(dir / "b" / "verdicts.json"));
    EXPECT_EQ(verdict(doc, "collar_esa").at("outcome"), "NotProven");
    EXPECT_EQ(verdict(doc, "collar_sc").at("outcome"), "Proven");

    r = run_cmd(config("classify", dir / "c", "half_strip"));
    ASSERT_EQ(r.code, Ok) << r.err;
    doc = nlohmann::json::parse(slurp(dir / "c" / "verdicts.json"));
    EXPECT_EQ(doc.at("geometry").at("assumption_A").at("status"), "Fails");
    EXPECT_NE(doc.at("geometry").at("assumption_A").at("witness").get<std::string>().find("midline"),
              std::string::npos);
    EXPECT_EQ(verdict(doc, "metric_esa").at("outcome"), "Inconclusive");
    EXPECT_EQ(verdict(doc, "metric_sc").at("outcome"), "Inconclusive");

    r = run_cmd(config("classify", dir / "d", "exterior"));
    ASSERT_EQ(r.code, Ok) << r.err;
    doc = nlohmann::json::parse(slurp(dir / "d" / "verdicts.json"));
    EXPECT_EQ(verdict(doc, "infinity_sc").at("outcome"), "Proven");
    fs::remove_all(dir);
}

TEST(Classify, InputErrors) {
    const auto dir = scratch_dir("errors");
    auto c = config("classify", dir);
    c.profile = (dir / "missing.toml").string();
    EXPECT_EQ(run_cmd(c).code, InputError);
    std::ofstream(dir / "bad.toml") << "[domain]\nkind = \"torus\"\n";
    c.profile = (dir / "bad.toml").string();
    EXPECT_EQ(run_cmd(c).code, InputError);
    // parses but violates an invariant
    std::ofstream(dir / "overlap.toml") << "[domain]\nkind = \"annulus\"\nr_in = 0.9\nr_out = 1.0\n"
                                           "[[component]]\nbeta = 1\ngamma = 0\nnu0 = 0.5\n"
                                           "[[component]]\nbeta = 1\ngamma = 0\nnu0 = 0.5\n";
    c.profile = (dir / "overlap.toml").string();
    EXPECT_EQ(run_cmd(c).code, InvariantError);
    c = config("classify", dir, "ball_beta1p5");
    c.tol = {"bogus=1"};
    EXPECT_EQ(run_cmd(c).code, InputError);
    fs::remove_all(dir);
}

TEST(Oracle, PuncturedBall) {
    const auto dir = scratch_dir("oracle");
    const auto r = run_cmd(config("oracle", dir, "punctured_ball"));
    ASSERT_EQ(r.code, Ok) << r.err;
    const auto doc = nlohmann::json::parse(slurp(dir / "oracles.json")).at("components");
    ASSERT_TRUE(doc.is_array());
    ASSERT_EQ(doc.size(), 2u);
    EXPECT_EQ(doc[0].at("feller"), "Entrance");
    EXPECT_EQ(doc[0].at("weyl"), "LimitCircle");
    EXPECT_EQ(doc[1].at("feller"), "Natural");
    EXPECT_EQ(doc[1].at("weyl"), "LimitPoint");
    fs::remove_all(dir);
}

TEST(Sweep, EmptyGridAndMissingRanges) {
    const auto dir = scratch_dir("sweep_empty");
    auto c = config("sweep", dir);
    EXPECT_EQ(run_cmd(c).code, InputError);
    c.beta = "3:0:1";
    c.gamma = "0";
    EXPECT_EQ(run_cmd(c).code, InputError);
    fs::remove_all(dir);
}

TEST(SweepAndReport, NoContradictionsAndDeterministic) {
    const auto dir = scratch_dir("sweep");
    auto c = config("sweep", dir / "one");
    c.beta = "0:3:0.5";
    c.gamma = "-2:4:1";
    ASSERT_EQ(run_cmd(c).code, Ok);
    c.out = (dir / "two").string();
    ASSERT_EQ(run_cmd(c).code, Ok);
    const auto a = slurp(dir / "one" / "sweep.csv"), b = slurp(dir / "two" / "sweep.csv");
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.rfind("beta,gamma,d,d_j,feller_class,weyl_class,criteria_sc,criteria_esa\n", 0), 0u);
    EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 1 + 7 * 7);

    auto rep = config("report", dir / "one");
    const auto r = run_cmd(rep);
    EXPECT_EQ(r.code, Ok) << r.err;
    EXPECT_NE(r.out.find("0 contradictions"), std::string::npos);
    EXPECT_TRUE(fs::exists(dir / "one" / "report.txt"));
    EXPECT_TRUE(fs::exists(dir / "one" / "report.csv"));
    fs::remove_all(dir);
}

TEST(Report, InjectedContradictionAndMissingInput) {
    const auto dir = scratch_dir("report");
    EXPECT_EQ(run_cmd(config("report", dir)).code, InputError);
    std::ofstream(dir / "sweep.csv") << "beta,gamma,d,d_j,feller_class,weyl_class,criteria_sc,criteria_esa\n"
                                        "0.5,0,1,0,Regular,LimitCircle,Proven,NotProven\n";
    const auto r = run_cmd(config("report", dir));
    EXPECT_EQ(r.code, Contradiction);
    EXPECT_NE(r.err.find("beta=0.5"), std::string::npos);
    std::ofstream(dir / "sweep.csv") << "beta,gamma,d,d_j,feller_class,weyl_class,criteria_sc,criteria_esa\n"
                                        "1.5,0,1,0,Natural,LimitCircle,Proven,Proven\n";
    EXPECT_EQ(run_cmd(config("report", dir)).code, Contradiction);
    fs::remove_all(dir);
}

TEST(Report, RetentionOverridesFellerClass) {
    std::istringstream csv("beta,gamma,d,d_j,feller_class,weyl_class,criteria_sc,criteria_esa,retention\n"
                           "1,0,1,0,Natural,LimitCircle,Proven,NotProven,0.95\n"
                           "2,0,1,0,Natural,LimitPoint,Proven,Proven,0.9999\n");
    const auto lines = cross_reference(csv, 0.01);
    ASSERT_EQ(lines.size(), 2u);
    EXPECT_TRUE(lines[0].contradiction);
    EXPECT_EQ(lines[0].oracle_sc, "leaks");
    EXPECT_FALSE(lines[1].contradiction);
    std::istringstream bad("beta,gamma\n0,0\n");
    EXPECT_THROW(cross_reference(bad, 0.01), Error);
}

TEST(Hardy, ShippedProfile) {
    const auto dir = scratch_dir("hardy");
    const auto r = run_cmd(config("hardy", dir, "ball_beta1p5"));
    ASSERT_EQ(r.code, Ok) << r.err;
    const auto doc = nlohmann::json::parse(slurp(dir / "hardy.json"));
    EXPECT_GE(doc.at("min_slack").get<double>(), -1e-8);
    fs::remove_all(dir);
}

TEST(Simulate, WritesArtifacts) {
    const auto dir = scratch_dir("simulate");
    auto c = config("simulate", dir, "ball_beta1p5");
    c.grid_levels = 3;
    c.tol = {"steps=64"};
    const auto r = run_cmd(c);
    ASSERT_EQ(r.code, Ok) << r.err;
    for (const char* f : {"refinement.csv", "trace.csv", "simulate.json"}) EXPECT_TRUE(fs::exists(dir / f)) << f;
    EXPECT_EQ(slurp(dir / "trace.csv").rfind("t,M\n", 0), 0u);
    fs::remove_all(dir);
}

TEST(Executable, ExitCodes) {
    const auto dir = scratch_dir("exe");
    const std::string out = " --out " + (dir / "o").string();
    EXPECT_EQ(run_exe("classify --profile " + profile_path("ball_beta1p5") + out), 0);
    EXPECT_TRUE(fs::exists(dir / "o" / "verdicts.json"));
    EXPECT_EQ(run_exe("frobnicate" + out), 2);
    EXPECT_EQ(run_exe("classify --profile " + (dir / "nope.toml").string() + out), 2);
    EXPECT_EQ(run_exe("sweep --beta 3:0:1 --gamma 0" + out), 2);
    EXPECT_EQ(run_exe("classify --tol junk=1 --profile " + profile_path("ball_beta1p5") + out), 2);
    fs::remove_all(dir);
}
