// stieltjes-sim: command-line front end over the stieltjes library.
#include "stieltjes/config.hpp"
#include "stieltjes/error.hpp"
#include "stieltjes/expr.hpp"
#include "stieltjes/extremal.hpp"
#include "stieltjes/ksint.hpp"
#include "stieltjes/models.hpp"
#include "stieltjes/regulated.hpp"
#include "stieltjes/solver.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace stieltjes;

namespace {

constexpr int kOk = 0;
constexpr int kOther = 1;
constexpr int kVerifyFailed = 2;
constexpr int kNoConvergence = 3;
constexpr int kConfig = 4;

// JSON numbers through the same shortest round-trip formatter as the CSVs
ordered_json num(double x)
{
    if (!std::isfinite(x)) return format_number(x);
    return ordered_json::parse(format_number(x));
}

ordered_json to_json(const VerifyReport& r)
{
    ordered_json j;
    j["passed"] = r.passed;
    j["worst_violation"] = num(r.worst_violation);
    j["t"] = num(r.t);
    j["t_end"] = num(r.t_end);
    j["component"] = r.component + 1;
    j["check"] = r.check;
    j["samples_checked"] = r.samples_checked;
    j["tolerance"] = num(r.tolerance);
    return j;
}

ordered_json to_json(const SolveReport& r)
{
    ordered_json j;
    j["scheme"] = to_string(r.scheme);
    j["mesh"] = r.mesh;
    j["nodes"] = r.solution.empty() ? 0 : r.solution.front().size();
    j["residual"] = num(r.residual);
    j["events"] = r.events.size();
    j["crossings"] = r.crossings.size();
    return j;
}

ordered_json to_json(const ExtremalReport& r)
{
    ordered_json j;
    j["status"] = to_string(r.status);
    j["iterations"] = r.iterations;
    j["monotone"] = r.monotone;
    j["bracket_escape"] = num(r.bracket_escape);
    ordered_json ch = ordered_json::array();
    for (double c : r.changes) ch.push_back(num(c));
    j["changes"] = ch;
    j["solve"] = to_json(r.result);
    return j;
}

void write_text(const fs::path& p, const std::string& s)
{
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot write '" + p.string() + "'");
    out << s;
}

std::string trajectory_csv(std::span<const RegulatedGrid> y)
{
    std::ostringstream os;
    write_trajectory_csv(os, y);
    return os.str();
}

// solution, per-component CSVs and events into dir
void write_solution(const fs::path& dir, const SolveReport& r, const VectorIntegrator& vg, bool csv)
{
    if (!csv) return;
    write_text(dir / "solution.csv", trajectory_csv(r.solution));
    for (std::size_t i = 0; i < r.solution.size(); ++i) {
        std::ostringstream os;
        write_solution_csv(os, r.solution[i], vg[i]);
        write_text(dir / ("y" + std::to_string(i + 1) + ".csv"), os.str());
    }
    std::ostringstream ev;
    write_events_csv(ev, r.events);
    write_text(dir / "events.csv", ev.str());
}

void emit_report(const Config& cfg, const ordered_json& report)
{
    std::cout << report.dump(2) << '\n';
    if (!cfg.output.dir.empty() && cfg.output.json) write_text(cfg.output.dir / "report.json", report.dump(2) + "\n");
}

double parse_number(const std::string& s, const std::string& what)
{
    try {
        return eval(parse(s), {});
    } catch (const Error& e) {
        throw ConfigError("", what + ": " + e.what());
    }
}

struct Common {
    std::string config;
    std::string out;
    std::optional<std::size_t> mesh;
    std::optional<std::string> scheme;
};

Config load(const Common& c)
{
    Config cfg = load_config(c.config);
    if (!c.out.empty()) cfg.output.dir = c.out;
    if (c.mesh) cfg.method.mesh = *c.mesh;
    if (c.scheme) {
        try {
            cfg.method.scheme = scheme_from_string(*c.scheme);
        } catch (const SchemeUnsupported& e) {
            throw ConfigError("/method/scheme", e.what());
        }
    }
    return cfg;
}

SolveOptions solve_options(const Config& cfg)
{
    SolveOptions o;
    o.scheme = cfg.method.scheme;
    o.mesh = cfg.method.mesh;
    return o;
}

ExtremalOptions extremal_options(const Config& cfg)
{
    ExtremalOptions o;
    o.direction = cfg.method.direction;
    o.mesh = cfg.method.mesh;
    o.tol = cfg.method.tol;
    o.max_iter = cfg.method.max_iter;
    o.window_cells = cfg.method.window_cells;
    return o;
}

const Bracket& need_bracket(const Config& cfg)
{
    if (!cfg.bracket) throw ConfigError("/bracket", "this command needs a bracket");
    return *cfg.bracket;
}

// ---- subcommands ----

struct IntegrateArgs {
    std::string f = "1";
    std::string g = "identity";
    std::string from;
    std::string to;
    std::optional<std::string> T;
    double tol = 1e-9;
    std::size_t mesh = 0;
    std::string out;
};

int run_integrate(const IntegrateArgs& a)
{
    const double u = parse_number(a.from, "--from");
    const double v = parse_number(a.to, "--to");
    Expr fe = parse(a.f);
    for (const auto& name : fe.variables()) {
        if (name != "t") throw ConfigError("", "--f may only use t, found '" + name + "'");
    }
    Interval dom{u, v};
    if (a.g == "bacteria") dom = {0.0, a.T ? parse_number(*a.T, "--T") : std::max(14.0, v)};
    else if (a.T) dom.t1 = parse_number(*a.T, "--T");
    const Integrator g = parse_integrator(a.g, dom);
    const Integrand f = Integrand::from_expr(fe);
    std::cout << format_number(ks_integrate(f, g, u, v, a.tol)) << '\n';
    if (a.mesh > 0) {
        const std::vector<double> nodes = solver_mesh(VectorIntegrator({g}), {u, v}, a.mesh);
        const RegulatedGrid h = indefinite_integral(f, g, nodes, a.tol);
        std::ostringstream os;
        write_csv(os, h);
        if (a.out.empty()) std::cout << os.str();
        else write_text(a.out, os.str());
    }
    return kOk;
}

int run_solve(const Common& c)
{
    const Config cfg = load(c);
    const SolveReport r = solve_mde(cfg.field, *cfg.vg, cfg.y0, cfg.window, solve_options(cfg));
    if (cfg.output.dir.empty()) {
        std::cout << trajectory_csv(r.solution);
        return kOk;
    }
    write_solution(cfg.output.dir, r, *cfg.vg, cfg.output.csv);
    emit_report(cfg, to_json(r));
    return kOk;
}

int run_derivative(const Common& c, double t, std::size_t component, const std::string& grid_csv)
{
    const Config cfg = load(c);
    if (component < 1 || component > cfg.n) throw ConfigError("", "--component out of range");
    RegulatedGrid y;
    if (!grid_csv.empty()) {
        std::ifstream in(grid_csv);
        if (!in) throw ConfigError("", "cannot open '" + grid_csv + "'");
        y = read_csv(in);
    } else {
        SolveOptions o = solve_options(cfg);
        o.compute_residual = false;
        y = solve_mde(cfg.field, *cfg.vg, cfg.y0, cfg.window, o).solution[component - 1];
    }
    const std::optional<double> d = stieltjes_derivative(y, (*cfg.vg)[component - 1], t);
    std::cout << (d ? format_number(*d) : std::string("undefined")) << '\n';
    return kOk;
}

int run_verify(const Common& c, bool conditions)
{
    const Config cfg = load(c);
    const Bracket& br = need_bracket(cfg);
    const double tol = cfg.method.verify_tol;
    const VerifyReport lo = verify_lower(br.alpha, cfg.field, *cfg.vg, cfg.y0, tol);
    const VerifyReport up = verify_upper(br.beta, cfg.field, *cfg.vg, cfg.y0, tol);
    const VerifyReport qm = check_quasimonotone(cfg.field, br, cfg.method.samples, cfg.method.seed, tol, &*cfg.vg);
    const VerifyReport jm = check_jump_monotone(cfg.field, *cfg.vg, br, 64, 8, cfg.method.seed, tol);
    bool passed = lo.passed && up.passed;
    if (conditions) passed = passed && qm.passed && jm.passed;
    ordered_json j;
    j["passed"] = passed;
    j["lower"] = to_json(lo);
    j["upper"] = to_json(up);
    j["quasimonotone"] = to_json(qm);
    j["jump_monotone"] = to_json(jm);
    emit_report(cfg, j);
    return passed ? kOk : kVerifyFailed;
}

int run_extremal(const Common& c, std::optional<std::string> direction)
{
    Config cfg = load(c);
    if (direction) {
        if (*direction == "greatest") cfg.method.direction = Direction::greatest;
        else if (*direction == "least") cfg.method.direction = Direction::least;
        else throw ConfigError("/method/direction", "expected greatest or least");
    }
    const Bracket& br = need_bracket(cfg);
    const double tol = cfg.method.verify_tol;
    const VerifyReport lo = verify_lower(br.alpha, cfg.field, *cfg.vg, cfg.y0, tol);
    const VerifyReport up = verify_upper(br.beta, cfg.field, *cfg.vg, cfg.y0, tol);
    if (!lo.passed || !up.passed) {
        ordered_json j;
        j["passed"] = false;
        j["lower"] = to_json(lo);
        j["upper"] = to_json(up);
        emit_report(cfg, j);
        return kVerifyFailed;
    }
    const ExtremalReport r = extremal_solve(cfg.field, *cfg.vg, cfg.y0, br, cfg.window, extremal_options(cfg));
    ordered_json j = to_json(r);
    j["direction"] = to_string(cfg.method.direction);
    j["preconditions"] = {{"lower", to_json(lo)},
                          {"upper", to_json(up)},
                          {"quasimonotone", to_json(check_quasimonotone(cfg.field, br, cfg.method.samples,
                                                                        cfg.method.seed, tol, &*cfg.vg))},
                          {"jump_monotone", to_json(check_jump_monotone(cfg.field, *cfg.vg, br, 64, 8,
                                                                        cfg.method.seed, tol))}};
    if (!cfg.output.dir.empty()) write_solution(cfg.output.dir, r.result, *cfg.vg, cfg.output.csv);
    emit_report(cfg, j);
    if (r.status == IterationStatus::max_iter_exceeded) return kNoConvergence;
    if (r.status == IterationStatus::bracket_violation) return kVerifyFailed;
    return kOk;
}

int run_functional(const Common& c)
{
    const Config cfg = load(c);
    if (!cfg.functional) throw ConfigError("/problem/field", "no functional dependence (mean1..meann or model functional)");
    const Bracket& br = need_bracket(cfg);
    FunctionalOptions o;
    o.inner = extremal_options(cfg);
    o.outer_tol = cfg.method.tol;
    o.outer_max = cfg.method.outer_max;
    o.seed = cfg.method.seed;
    o.h5_tol = cfg.method.verify_tol;
    const FunctionalReport r = functional_extremal(*cfg.functional, *cfg.vg, cfg.y0, br, cfg.window, o);
    ordered_json j;
    j["status"] = to_string(r.status);
    j["outer_iterations"] = r.outer_iterations;
    ordered_json ch = ordered_json::array();
    for (double x : r.outer_changes) ch.push_back(num(x));
    j["outer_changes"] = ch;
    j["monotone"] = r.monotone;
    j["h5"] = to_json(r.h5);
    j["residual"] = num(r.residual);
    j["inner"] = to_json(r.inner);
    if (!cfg.output.dir.empty()) write_solution(cfg.output.dir, r.inner.result, *cfg.vg, cfg.output.csv);
    emit_report(cfg, j);
    return r.status == OuterStatus::converged ? kOk : kNoConvergence;
}

struct ModelArgs {
    std::string L = "10", c = "pi", a = "1/7", r = "1", p0 = "5", T = "14", N = "floor", slope = "1";
    std::string lower = "zero";
    std::size_t mesh = 1400;
    std::string out = "bacteria_out";
};

int run_model(const ModelArgs& m)
{
    BacteriaParams p;
    p.L = parse_number(m.L, "--L");
    p.c = parse_number(m.c, "--c");
    p.a = parse_number(m.a, "--a");
    p.r = parse_number(m.r, "--r");
    p.p0 = parse_number(m.p0, "--p0");
    p.T = parse_number(m.T, "--T");
    if (m.N == "floor") {
        p.N.kind = CarryingCapacity::Kind::floor;
    } else if (m.N == "linear") {
        p.N.kind = CarryingCapacity::Kind::linear;
        p.N.slope = parse_number(m.slope, "--slope");
    } else {
        p.N.kind = CarryingCapacity::Kind::expr;
        p.N.expr = parse(m.N);
    }
    LowerOption lower = LowerOption::zero;
    if (m.lower == "evaporation") lower = LowerOption::evaporation;
    else if (m.lower != "zero") throw ConfigError("", "--lower must be zero or evaporation");

    BacteriaProblem prob = [&] {
        try {
            return bacteria_build(p, lower, m.mesh);
        } catch (const InvalidParams& e) {
            throw ConfigError("", e.what());
        }
    }();
    SolveOptions o;
    o.scheme = Scheme::rk4_density;
    o.mesh = m.mesh;
    const SolveReport r = solve_mde(prob.field, prob.vg, prob.y0, prob.window, o);
    const RegulatedGrid& pg = r.solution[0];
    const RegulatedGrid& wg = r.solution[1];

    std::vector<double> anchors;
    for (double t = 2.0; t <= p.T; t += 2.0) anchors.push_back(pg(t));
    const fs::path dir = m.out;
    write_solution(dir, r, prob.vg, true);

    std::ostringstream gcsv, wcsv, pcsv, ccsv;
    gcsv << "t,g,g_post\n";
    for (double t : wg.nodes()) {
        const GValue gv = g_eval(prob.vg[1], t);
        gcsv << format_number(t) << ',' << format_number(gv.value) << ',' << format_number(gv.right_limit) << '\n';
    }
    double w_err = 0.0;
    wcsv << "t,w,w_post,W\n";
    for (std::size_t j = 0; j < wg.size(); ++j) {
        const double t = wg.nodes()[j];
        const double W = bacteria_W(p, t, anchors);
        w_err = std::max(w_err, std::fabs(wg.values()[j] - W));
        wcsv << format_number(t) << ',' << format_number(wg.values()[j]) << ',' << format_number(wg.posts()[j]) << ','
             << format_number(W) << '\n';
    }
    const std::vector<FloorSegment> segs = bacteria_floor_segments(p, wg);
    double p_err = 0.0;
    pcsv << "t,p,p_closed_form\n";
    for (std::size_t j = 0; j < pg.size(); ++j) {
        const double t = pg.nodes()[j];
        const double pc = bacteria_p_closed_form(p, segs, t);
        p_err = std::max(p_err, std::fabs(pg.values()[j] - pc));
        pcsv << format_number(t) << ',' << format_number(pg.values()[j]) << ',' << format_number(pc) << '\n';
    }
    ccsv << "t\n";
    for (double t : bacteria_level_crossings(p, wg)) ccsv << format_number(t) << '\n';
    write_text(dir / "gwater.csv", gcsv.str());
    write_text(dir / "watersol.csv", wcsv.str());
    write_text(dir / "popsol.csv", pcsv.str());
    write_text(dir / "crossings.csv", ccsv.str());

    ordered_json j;
    j["solve"] = to_json(r);
    j["w_max_error"] = num(w_err);
    j["p_max_error"] = num(p_err);
    j["segments"] = segs.size();
    j["lower"] = to_json(verify_lower(prob.bracket.alpha, prob.field, prob.vg, prob.y0));
    j["upper"] = to_json(verify_upper(prob.bracket.beta, prob.field, prob.vg, prob.y0));
    std::cout << j.dump(2) << '\n';
    write_text(dir / "report.json", j.dump(2) + "\n");
    return kOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Measure differential equation toolkit"};
    app.require_subcommand(1);

    IntegrateArgs ia;
    auto* integrate = app.add_subcommand("integrate", "Kurzweil-Stieltjes integral of f(t) against g over [from, to)");
    integrate->add_option("--f", ia.f, "integrand in t")->capture_default_str();
    integrate->add_option("--g", ia.g, "identity, bacteria or a JSON driver descriptor")->capture_default_str();
    integrate->add_option("--from", ia.from, "lower limit")->required();
    integrate->add_option("--to", ia.to, "upper limit")->required();
    integrate->add_option("--T", ia.T, "driver domain end");
    integrate->add_option("--tol", ia.tol, "absolute tolerance")->capture_default_str();
    integrate->add_option("--mesh", ia.mesh, "also emit the indefinite integral on this many cells");
    integrate->add_option("--out", ia.out, "CSV path for the indefinite integral");

    Common common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", common.config, "JSON configuration")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", common.out, "output directory (overrides output.dir)");
        sub->add_option("--mesh", common.mesh, "override method.mesh");
        sub->add_option("--scheme", common.scheme, "override method.scheme");
    };
    auto* solve = app.add_subcommand("solve", "solve the configured equation");
    add_common(solve);

    double dt = 0.0;
    std::size_t dcomp = 1;
    std::string dgrid;
    auto* deriv = app.add_subcommand("derivative", "Stieltjes derivative of a solution component");
    add_common(deriv);
    deriv->add_option("--t", dt, "time")->required();
    deriv->add_option("--component", dcomp, "1-based component")->capture_default_str();
    deriv->add_option("--grid", dgrid, "read the function from a grid CSV instead of solving");

    bool conditions = false;
    auto* verify = app.add_subcommand("verify-bracket", "verify the lower and upper solutions of the bracket");
    add_common(verify);
    verify->add_flag("--conditions", conditions, "also fail on quasimonotonicity or jump-monotonicity");

    std::optional<std::string> direction;
    auto* extremal = app.add_subcommand("extremal", "greatest or least solution in the bracket");
    add_common(extremal);
    extremal->add_option("--direction", direction, "greatest or least");

    auto* functional = app.add_subcommand("extremal-functional", "outer fixed point for a functional field");
    add_common(functional);

    ModelArgs ma;
    auto* model = app.add_subcommand("model", "built-in models");
    model->require_subcommand(1);
    auto* bacteria = model->add_subcommand("bacteria", "bacteria tank: solution, oracles and figure data");
    bacteria->add_option("--L", ma.L)->capture_default_str();
    bacteria->add_option("--c", ma.c)->capture_default_str();
    bacteria->add_option("--a", ma.a)->capture_default_str();
    bacteria->add_option("--r", ma.r)->capture_default_str();
    bacteria->add_option("--p0", ma.p0)->capture_default_str();
    bacteria->add_option("--T", ma.T)->capture_default_str();
    bacteria->add_option("--N", ma.N, "floor, linear or an expression in w")->capture_default_str();
    bacteria->add_option("--slope", ma.slope)->capture_default_str();
    bacteria->add_option("--lower", ma.lower, "zero or evaporation")->capture_default_str();
    bacteria->add_option("--mesh", ma.mesh)->capture_default_str();
    bacteria->add_option("--out", ma.out, "output directory")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfig;
    }

    try {
        if (*integrate) return run_integrate(ia);
        if (*solve) return run_solve(common);
        if (*deriv) return run_derivative(common, dt, dcomp, dgrid);
        if (*verify) return run_verify(common, conditions);
        if (*extremal) return run_extremal(common, direction);
        if (*functional) return run_functional(common);
        if (*bacteria) return run_model(ma);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const NoConvergence& e) {
        std::cerr << "no convergence: " << e.what() << '\n';
        return kNoConvergence;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kOther;
    }
    return kOther;
}
