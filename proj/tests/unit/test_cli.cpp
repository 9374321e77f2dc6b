// Golden-file checks: CLI output equals direct library calls, and exit codes.
#include "stieltjes/config.hpp"
#include "stieltjes/ksint.hpp"
#include "stieltjes/models.hpp"
#include "stieltjes/solver.hpp"

#include "json.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

using namespace stieltjes;
namespace fs = std::filesystem;

namespace {
struct SimRun {
    int code;
    std::string out;
};

SimRun sim(const std::string& args)
{
    const std::string cmd = std::string(STIELTJES_SIM) + " " + args + " 2>/dev/null";
    FILE* p = popen(cmd.c_str(), "r");
    std::string out;
    std::array<char, 4096> buf;
    std::size_t n;
    while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) out.append(buf.data(), n);
    const int st = pclose(p);
    return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, out};
}

std::string cfg(const char* name)
{
    return (fs::path(STIELTJES_CONFIG_DIR) / name).string();
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string trajectory(std::span<const RegulatedGrid> y)
{
    std::ostringstream os;
    write_trajectory_csv(os, y);
    return os.str();
}

fs::path scratch(const char* name)
{
    const fs::path d = fs::temp_directory_path() / ("stieltjes_cli_" + std::to_string(::getpid())) / name;
    fs::remove_all(d);
    return d;
}
} // namespace

TEST(Cli, SolveMatchesLibrary)
{
    for (const char* name : {"decay.json", "logistic.json"}) {
        const Config c = load_config(cfg(name));
        SolveOptions o;
        o.scheme = c.method.scheme;
        o.mesh = c.method.mesh;
        const auto r = solve_mde(c.field, *c.vg, c.y0, c.window, o);
        const SimRun run = sim("solve --config " + cfg(name));
        EXPECT_EQ(run.code, 0);
        EXPECT_EQ(run.out, trajectory(r.solution)) << name;
    }
}

TEST(Cli, DecayIsTheRecursion)
{
    const SimRun run = sim("solve --config " + cfg("decay.json"));
    ASSERT_EQ(run.code, 0);
    std::istringstream in(run.out);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "t,y1,y1_post");
    double y = 1.0;
    while (std::getline(in, line)) {
        double t, v, post;
        char c1, c2;
        std::istringstream ls(line);
        ls >> t >> c1 >> v >> c2 >> post;
        EXPECT_EQ(v, y) << line;
        if (t > 0.0 && t < 1.0) y = y + (-0.5 * y) * 1.0;
        EXPECT_EQ(post, t < 1.0 && t > 0.0 ? y : v) << line;
    }
}

TEST(Cli, SolveOutputDirectory)
{
    const fs::path d = scratch("solve");
    const SimRun run = sim("solve --config " + cfg("logistic.json") + " --out " + d.string() + " --mesh 100");
    ASSERT_EQ(run.code, 0);
    const Config c = load_config(cfg("logistic.json"));
    SolveOptions o;
    o.scheme = c.method.scheme;
    o.mesh = 100;
    const auto r = solve_mde(c.field, *c.vg, c.y0, c.window, o);
    EXPECT_EQ(slurp(d / "solution.csv"), trajectory(r.solution));
    std::ostringstream y1;
    write_solution_csv(y1, r.solution[0], (*c.vg)[0]);
    EXPECT_EQ(slurp(d / "y1.csv"), y1.str());
    const auto rep = nlohmann::json::parse(slurp(d / "report.json"));
    EXPECT_EQ(rep["mesh"], 100);
    EXPECT_EQ(rep["residual"].get<double>(), r.residual);
}

TEST(Cli, IntegrateBacteria)
{
    const SimRun run = sim("integrate --f 1 --g bacteria --from 0 --to 3");
    ASSERT_EQ(run.code, 0);
    const double lib = ks_integrate(Integrand::from_function([](double) { return 1.0; }), bacteria_g(14.0), 0.0, 3.0, 1e-9);
    EXPECT_EQ(run.out, format_number(lib) + "\n");
    EXPECT_NEAR(std::stod(run.out), 1.0 + 4.0 / 3.141592653589793, 1e-9);
}

TEST(Cli, Derivative)
{
    const SimRun run = sim("derivative --config " + cfg("decay.json") + " --t 0.25");
    ASSERT_EQ(run.code, 0);
    const Config c = load_config(cfg("decay.json"));
    SolveOptions o;
    o.scheme = c.method.scheme;
    o.mesh = c.method.mesh;
    o.compute_residual = false;
    const auto y = solve_mde(c.field, *c.vg, c.y0, c.window, o).solution[0];
    EXPECT_EQ(run.out, format_number(*stieltjes_derivative(y, (*c.vg)[0], 0.25)) + "\n");
    EXPECT_EQ(sim("derivative --config " + cfg("decay.json") + " --t 0.3").out, "undefined\n");
}

TEST(Cli, VerifyBracket)
{
    const SimRun ok = sim("verify-bracket --config " + cfg("bacteria.json"));
    EXPECT_EQ(ok.code, 0);
    EXPECT_TRUE(nlohmann::json::parse(ok.out)["passed"].get<bool>());
    const SimRun bad = sim("verify-bracket --config " + cfg("bacteria_zero_lower.json"));
    EXPECT_EQ(bad.code, 2);
    const auto j = nlohmann::json::parse(bad.out);
    EXPECT_FALSE(j["lower"]["passed"].get<bool>());
    EXPECT_TRUE(j["upper"]["passed"].get<bool>());
}

TEST(Cli, ExtremalMatchesLibrary)
{
    const fs::path d = scratch("extremal");
    const SimRun run = sim("extremal --config " + cfg("decay_bracket.json") + " --out " + d.string() + " --direction least");
    ASSERT_EQ(run.code, 0);
    const Config c = load_config(cfg("decay_bracket.json"));
    ExtremalOptions o;
    o.direction = Direction::least;
    o.mesh = c.method.mesh;
    o.tol = c.method.tol;
    o.max_iter = c.method.max_iter;
    o.window_cells = c.method.window_cells;
    const auto r = extremal_solve(c.field, *c.vg, c.y0, *c.bracket, c.window, o);
    EXPECT_EQ(slurp(d / "solution.csv"), trajectory(r.result.solution));
    const auto j = nlohmann::json::parse(run.out);
    EXPECT_EQ(j["status"], "converged");
    EXPECT_EQ(j["iterations"].get<std::size_t>(), r.iterations);
    EXPECT_EQ(j["direction"], "least");
}

TEST(Cli, ExitCodes)
{
    EXPECT_EQ(sim("").code, 4);
    EXPECT_EQ(sim("solve").code, 4);
    EXPECT_EQ(sim("solve --config /nonexistent.json").code, 4);
    EXPECT_EQ(sim("integrate --f 'y+1' --from 0 --to 1").code, 4);
    EXPECT_EQ(sim("extremal --config " + cfg("cube_root.json") + " --direction sideways").code, 4);
    EXPECT_EQ(sim("extremal --config " + cfg("decay_bracket.json") + " --direction greatest").code, 0);
    EXPECT_EQ(sim("extremal --config " + cfg("bacteria_zero_lower.json")).code, 2);
    EXPECT_EQ(sim("extremal-functional --config " + cfg("decay_bracket.json")).code, 4);
    EXPECT_EQ(sim("extremal-functional --config " + cfg("mean_coupled.json")).code, 0);
}

TEST(Cli, ModelBacteria)
{
    const fs::path d = scratch("model");
    const SimRun run = sim("model bacteria --out " + d.string());
    ASSERT_EQ(run.code, 0);
    const auto j = nlohmann::json::parse(run.out);
    EXPECT_LT(j["w_max_error"].get<double>(), 1e-6);
    EXPECT_LT(j["p_max_error"].get<double>(), 1e-4);
    EXPECT_TRUE(j["upper"]["passed"].get<bool>());
    BacteriaParams p;
    const auto prob = bacteria_build(p);
    SolveOptions o;
    o.scheme = Scheme::rk4_density;
    o.mesh = 1400;
    const auto r = solve_mde(prob.field, prob.vg, prob.y0, prob.window, o);
    EXPECT_EQ(slurp(d / "solution.csv"), trajectory(r.solution));
    for (const char* f : {"gwater.csv", "watersol.csv", "popsol.csv", "crossings.csv", "events.csv", "report.json"})
        EXPECT_TRUE(fs::exists(d / f)) << f;
}

TEST(Cli, ByteStable)
{
    const SimRun a = sim("solve --config " + cfg("logistic.json") + " --mesh 50");
    const SimRun b = sim("solve --config " + cfg("logistic.json") + " --mesh 50");
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(a.out.find('\r'), std::string::npos);
}
