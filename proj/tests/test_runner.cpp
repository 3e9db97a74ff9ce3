#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "relfix/runner.hpp"

namespace {

using namespace relfix;
using namespace relfix::cli;
namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("relfix_test_" + name);
    fs::remove_all(dir);
    return dir;
}

FbvpConfig parse(const std::string& text) {
    std::istringstream in(text);
    return parse_fbvp_config(in);
}

int cli(const std::string& args) {
    const std::string cmd = std::string(RELFIX_CLI) + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

TEST(Config, Defaults) {
    const auto c = parse("");
    EXPECT_EQ(c.beta, 1.5);
    EXPECT_EQ(c.f, "sin_sq");
    EXPECT_FALSE(c.L.has_value());
    EXPECT_EQ(to_problem(c).L, 0.2);
}

TEST(Config, ParsesEveryField) {
    const auto c = parse(
        "# comment\n beta = 1.8 \nk=0.25\nL = 0.3\nf = linear\nf_scale = 0.1\nf_shift = 0.05\n"
        "variant = green_corrected\nn = 64\ntol = 1e-10\nmax_iter = 50\nx0 = 0.5\nseed = 9\nprobe_count = 2\n");
    EXPECT_EQ(c.beta, 1.8);
    EXPECT_EQ(c.k, 0.25);
    EXPECT_EQ(*c.L, 0.3);
    EXPECT_EQ(c.f, "linear");
    EXPECT_EQ(c.f_shift, 0.05);
    EXPECT_EQ(c.variant, OperatorVariant::GreenCorrected);
    EXPECT_EQ(c.n, 64u);
    EXPECT_EQ(c.max_iter, 50u);
    EXPECT_EQ(c.seed, 9u);
    EXPECT_EQ(c.probe_count, 2u);
}

void expect_config_error(const std::string& text, const std::string& field) {
    try {
        (void)parse(text);
        FAIL() << "accepted: " << text;
    } catch (const ConfigError& e) {
        EXPECT_EQ(std::string(e.what()).rfind(field, 0), 0u) << e.what();
    }
}

TEST(Config, ErrorsNameTheField) {
    expect_config_error("gamma = 1\n", "gamma");
    expect_config_error("beta = 2.5\n", "beta");
    expect_config_error("beta = abc\n", "beta");
    expect_config_error("k = 1\n", "k");
    expect_config_error("n = -4\n", "n");
    expect_config_error("n = 2\n", "n");
    expect_config_error("variant = exact\n", "variant");
    expect_config_error("f = cubic\n", "f");
    expect_config_error("tol = 1e-8\ntol = 1e-9\n", "tol");
    expect_config_error("x0 = -1\n", "x0");
    expect_config_error("just words\n", "line 1");
}

TEST(Report, BuilderSummary) {
    ReportBuilder rb;
    rb.check("a", true);
    rb.advisory("note", "text");
    EXPECT_TRUE(rb.all_pass());
    rb.check("b", false, {{"v", 1}}, "why");
    const auto j = rb.finish(Json{{"command", "x"}});
    EXPECT_FALSE(rb.all_pass());
    EXPECT_EQ(j["summary"]["asserted"], 2);
    EXPECT_EQ(j["summary"]["passed"], 1);
    EXPECT_EQ(j["summary"]["status"], "fail");
    EXPECT_EQ(j["advisories"].size(), 1u);
}

TEST(VerifyExample, AllExamplesPass) {
    for (auto id : {ExampleId::Ex1_7, ExampleId::Ex1_13, ExampleId::Ex1_14, ExampleId::Ex2_3, ExampleId::Ex2_4}) {
        const auto r = verify_example(id);
        EXPECT_EQ(r.status, kExitOk) << fixtures::to_string(id) << "\n" << r.report.dump(1);
    }
}

TEST(VerifyExample, FourBranchReport) {
    const auto r = verify_example(ExampleId::Ex2_4);
    bool seen = false;
    for (const auto& c : r.report["checks"])
        if (c["name"] == "lambda_hat_is_three_quarters") {
            seen = true;
            EXPECT_NEAR(c["values"]["estimate"]["lambda_hat"].get<double>(), 0.75, 1e-12);
        }
    EXPECT_TRUE(seen);
    ASSERT_TRUE(r.orbit.has_value());
    EXPECT_LE(std::abs(r.orbit->last().scalar()), 1e-9);
}

TEST(VerifyExample, HalfOpenHasDiagonalAdvisory) {
    const auto r = verify_example(ExampleId::Ex2_3);
    EXPECT_EQ(r.status, kExitOk);
    bool seen = false;
    for (const auto& a : r.report["advisories"]) seen = seen || a["name"] == "lambda_supremum_near_diagonal";
    EXPECT_TRUE(seen);
}

TEST(SolveRun, ConstantSourceTwoIterations) {
    const auto c = parse("f = constant\nf_scale = 1\nL = 0.5\nn = 64\n");
    const auto r = solve_fbvp_run(c);
    EXPECT_EQ(r.status, kExitOk) << r.report.dump(1);
    EXPECT_EQ(r.report["solution"]["iterations"], 2);
}

TEST(SolveRun, CheckFailureStatus) {
    // An L below the true Lipschitz constant is caught by the spot check.
    const auto r = solve_fbvp_run(parse("f = sin_sq\nf_scale = 0.2\nL = 0.1\nn = 32\n"));
    EXPECT_EQ(r.status, kExitCheckFailed);
}

TEST(Run, WritesArtifactsAndReadsBack) {
    const auto dir = scratch("run");
    RunConfig cfg;
    cfg.command = Command::SolveFbvp;
    cfg.problem = parse("n = 32\n");
    cfg.output_dir = dir;
    std::ostringstream out, err;
    EXPECT_EQ(run(cfg, out, err), kExitOk) << err.str();
    EXPECT_TRUE(fs::exists(dir / "report.json"));
    EXPECT_TRUE(fs::exists(dir / "orbit.csv"));
    EXPECT_EQ(slurp(dir / "solution.csv").rfind("t,x\n", 0), 0u);

    RunConfig rep;
    rep.command = Command::Report;
    rep.input_dir = dir;
    std::ostringstream summary;
    EXPECT_EQ(run(rep, summary, err), kExitOk);
    EXPECT_NE(summary.str().find("status: pass"), std::string::npos);
}

TEST(Run, MissingReportIsUsageError) {
    RunConfig rep;
    rep.command = Command::Report;
    rep.input_dir = scratch("empty");
    std::ostringstream out, err;
    EXPECT_EQ(run(rep, out, err), kExitUsage);
}

TEST(Run, InvalidCombination) {
    RunConfig cfg;
    cfg.command = Command::VerifyExample;
    std::ostringstream out, err;
    EXPECT_EQ(run(cfg, out, err), kExitUsage);
}

TEST(Cli, ExitCodes) {
    const auto dir = scratch("cli");
    EXPECT_EQ(cli("verify-example Ex2_4 --out " + (dir / "a").string()), 0);
    EXPECT_EQ(cli("verify-example Ex9_9 --out " + (dir / "b").string()), 2);
    EXPECT_EQ(cli("solve-fbvp --config /nonexistent.cfg"), 2);
    EXPECT_EQ(cli("report --in " + (dir / "a").string()), 0);
    EXPECT_EQ(cli(""), 2);
}

TEST(Cli, ByteIdenticalReruns) {
    const auto dir = scratch("det");
    const std::string cfgfile = std::string(RELFIX_SOURCE_DIR) + "/configs/sin_sq.cfg";
    for (const char* run_name : {"r1", "r2"}) {
        ASSERT_EQ(cli("verify-example Ex2_3 --seed 4 --out " + (dir / run_name / "ex").string()), 0);
        ASSERT_EQ(cli("solve-fbvp --config " + cfgfile + " --out " + (dir / run_name / "fb").string()), 0);
    }
    for (const char* sub : {"ex/report.json", "ex/orbit.csv", "fb/report.json", "fb/orbit.csv", "fb/solution.csv"}) {
        const auto a = slurp(dir / "r1" / sub), b = slurp(dir / "r2" / sub);
        EXPECT_FALSE(a.empty()) << sub;
        EXPECT_EQ(a, b) << sub;
    }
}

}  // namespace
