#include "stieltjes/config.hpp"

#include "stieltjes/error.hpp"
#include "stieltjes/regulated.hpp"

#include "json.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>

namespace stieltjes {

namespace {

using nlohmann::json;

std::string child(const std::string& ptr, std::string_view key)
{
    std::string k(key);
    std::string esc;
    for (char c : k) {
        if (c == '~') esc += "~0";
        else if (c == '/') esc += "~1";
        else esc += c;
    }
    return ptr + "/" + esc;
}

std::string child(const std::string& ptr, std::size_t idx) { return ptr + "/" + std::to_string(idx); }

void only_keys(const json& j, const std::string& ptr, std::initializer_list<std::string_view> allowed)
{
    if (!j.is_object()) throw ConfigError(ptr, "expected an object");
    for (const auto& [key, _] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ConfigError(child(ptr, key), "unknown key");
    }
}

const json& need(const json& j, const std::string& ptr, std::string_view key)
{
    auto it = j.find(std::string(key));
    if (it == j.end()) throw ConfigError(child(ptr, key), "required key missing");
    return *it;
}

const json* maybe(const json& j, std::string_view key)
{
    auto it = j.find(std::string(key));
    return it == j.end() ? nullptr : &*it;
}

double number(const json& j, const std::string& ptr)
{
    if (!j.is_number()) throw ConfigError(ptr, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ConfigError(ptr, "expected a finite number");
    return v;
}

// numbers may also be given as expressions in the parameters ("pi", "1/7")
double scalar(const json& j, const std::string& ptr, const Env& params = {})
{
    if (j.is_string()) {
        try {
            const double v = eval(parse(j.get<std::string>()), params);
            if (!std::isfinite(v)) throw ConfigError(ptr, "expression is not finite");
            return v;
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            throw ConfigError(ptr, e.what());
        }
    }
    return number(j, ptr);
}

std::size_t count(const json& j, const std::string& ptr, std::size_t min = 0)
{
    if (!j.is_number_integer() && !j.is_number_unsigned()) throw ConfigError(ptr, "expected an integer");
    const auto v = j.get<long long>();
    if (v < static_cast<long long>(min)) throw ConfigError(ptr, "must be at least " + std::to_string(min));
    return static_cast<std::size_t>(v);
}

std::string text(const json& j, const std::string& ptr)
{
    if (!j.is_string()) throw ConfigError(ptr, "expected a string");
    return j.get<std::string>();
}

Expr expression(const json& j, const std::string& ptr)
{
    try {
        if (j.is_number()) return Expr::constant(number(j, ptr));
        return parse(text(j, ptr));
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(ptr, e.what());
    }
}

void check_variables(const Expr& e, const std::set<std::string>& allowed, const std::string& ptr)
{
    for (const auto& v : e.variables()) {
        if (!allowed.count(v)) throw ConfigError(ptr, "unknown variable '" + v + "'");
    }
}

std::set<std::string> time_names(const Env& params)
{
    std::set<std::string> s{"t"};
    for (const auto& [k, _] : params) s.insert(k);
    return s;
}

Integrator integrator_from(const json& j, const std::string& ptr, Interval domain, const Env& params)
{
    if (j.is_string()) {
        if (j.get<std::string>() == "bacteria") {
            if (domain.t0 != 0.0) throw ConfigError(ptr, "the bacteria driver starts at t = 0");
            return bacteria_g(domain.t1);
        }
        if (j.get<std::string>() == "identity") return Integrator(domain, AcPart::identity());
        throw ConfigError(ptr, "unknown built-in driver '" + j.get<std::string>() + "'");
    }
    only_keys(j, ptr, {"ac", "jumps"});
    AcPart ac = AcPart::none();
    if (const json* a = maybe(j, "ac")) {
        const std::string ap = child(ptr, "ac");
        only_keys(*a, ap, {"kind", "expr", "density", "kinks"});
        const std::string kind = text(need(*a, ap, "kind"), child(ap, "kind"));
        std::vector<double> kinks;
        if (const json* k = maybe(*a, "kinks")) {
            if (!k->is_array()) throw ConfigError(child(ap, "kinks"), "expected an array");
            for (std::size_t i = 0; i < k->size(); ++i) kinks.push_back(scalar((*k)[i], child(child(ap, "kinks"), i), params));
        }
        auto time_fn = [&](std::string_view key) {
            const std::string kp = child(ap, key);
            const Expr e = expression(need(*a, ap, key), kp);
            check_variables(e, time_names(params), kp);
            return std::make_shared<TimeFunction>(e, params);
        };
        if (kind == "none") {
            ac = AcPart::none();
        } else if (kind == "identity") {
            ac = AcPart::identity();
        } else if (kind == "density") {
            auto d = time_fn("expr");
            ac = AcPart::from_density([d](double t) { return (*d)(t); }, kinks);
        } else if (kind == "primitive") {
            auto p = time_fn("expr");
            AcPart::Fn dens;
            if (maybe(*a, "density")) {
                auto d = time_fn("density");
                dens = [d](double t) { return (*d)(t); };
            }
            ac = AcPart::from_primitive([p](double t) { return (*p)(t); }, dens, kinks);
        } else {
            throw ConfigError(child(ap, "kind"), "expected none, identity, density or primitive");
        }
    }
    std::vector<Jump> jumps;
    if (const json* js = maybe(j, "jumps")) {
        const std::string jp = child(ptr, "jumps");
        if (js->is_array()) {
            for (std::size_t k = 0; k < js->size(); ++k) {
                const std::string p = child(jp, k);
                only_keys((*js)[k], p, {"t", "size"});
                jumps.push_back({scalar(need((*js)[k], p, "t"), child(p, "t"), params),
                                 scalar(need((*js)[k], p, "size"), child(p, "size"), params)});
            }
            std::sort(jumps.begin(), jumps.end(), [](const Jump& x, const Jump& y) { return x.time < y.time; });
        } else {
            only_keys(*js, jp, {"rule"});
            const std::string rp = child(jp, "rule");
            const json& r = need(*js, jp, "rule");
            only_keys(r, rp, {"period", "size", "start"});
            const double period = scalar(need(r, rp, "period"), child(rp, "period"), params);
            const double size = scalar(need(r, rp, "size"), child(rp, "size"), params);
            const double start = maybe(r, "start") ? scalar(r["start"], child(rp, "start"), params) : domain.t0 + period;
            if (!(period > 0.0)) throw ConfigError(child(rp, "period"), "must be positive");
            jumps = periodic_jumps(start, period, size, domain.t1);
        }
    }
    try {
        return Integrator(domain, std::move(ac), std::move(jumps));
    } catch (const Error& e) {
        throw ConfigError(ptr, e.what());
    }
}

RegulatedGrid bound_grid(const json& j, const std::string& ptr, const std::vector<double>& nodes, const Env& params,
                         const std::filesystem::path& base)
{
    if (j.is_object()) {
        only_keys(j, ptr, {"csv"});
        std::filesystem::path p = text(need(j, ptr, "csv"), child(ptr, "csv"));
        if (p.is_relative()) p = base / p;
        std::ifstream in(p);
        if (!in) throw ConfigError(child(ptr, "csv"), "cannot open '" + p.string() + "'");
        try {
            return read_csv(in);
        } catch (const Error& e) {
            throw ConfigError(child(ptr, "csv"), e.what());
        }
    }
    const Expr e = expression(j, ptr);
    check_variables(e, time_names(params), ptr);
    auto fn = std::make_shared<TimeFunction>(e, params);
    return RegulatedGrid::sample([fn](double t) { return (*fn)(t); }, nodes);
}

std::vector<double> vector_of(const json& j, const std::string& ptr, std::size_t n, const Env& params)
{
    if (!j.is_array() || j.size() != n) throw ConfigError(ptr, "expected an array of " + std::to_string(n) + " entries");
    std::vector<double> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(scalar(j[i], child(ptr, i), params));
    return out;
}

CarryingCapacity capacity_from(const json& j, const std::string& ptr, double slope)
{
    CarryingCapacity N;
    const std::string s = text(j, ptr);
    if (s == "floor") {
        N.kind = CarryingCapacity::Kind::floor;
    } else if (s == "linear") {
        N.kind = CarryingCapacity::Kind::linear;
        N.slope = slope;
    } else {
        N.kind = CarryingCapacity::Kind::expr;
        N.expr = expression(j, ptr);
        check_variables(*N.expr, {"w"}, ptr);
    }
    return N;
}

void parse_model(const json& m, Config& cfg)
{
    const std::string ptr = "/model";
    only_keys(m, ptr, {"name", "L", "c", "a", "r", "p0", "T", "N", "slope", "lower", "functional", "mesh"});
    if (text(need(m, ptr, "name"), child(ptr, "name")) != "bacteria")
        throw ConfigError(child(ptr, "name"), "only the bacteria model is built in");
    ModelConfig mc;
    BacteriaParams& p = mc.params;
    if (auto* v = maybe(m, "L")) p.L = scalar(*v, child(ptr, "L"));
    if (auto* v = maybe(m, "c")) p.c = scalar(*v, child(ptr, "c"));
    if (auto* v = maybe(m, "a")) p.a = scalar(*v, child(ptr, "a"));
    if (auto* v = maybe(m, "r")) p.r = scalar(*v, child(ptr, "r"));
    if (auto* v = maybe(m, "p0")) p.p0 = scalar(*v, child(ptr, "p0"));
    if (auto* v = maybe(m, "T")) p.T = scalar(*v, child(ptr, "T"));
    const double slope = maybe(m, "slope") ? scalar(m["slope"], child(ptr, "slope")) : 1.0;
    if (auto* v = maybe(m, "N")) p.N = capacity_from(*v, child(ptr, "N"), slope);
    if (auto* v = maybe(m, "lower")) {
        const std::string s = text(*v, child(ptr, "lower"));
        if (s == "zero") mc.lower = LowerOption::zero;
        else if (s == "evaporation") mc.lower = LowerOption::evaporation;
        else throw ConfigError(child(ptr, "lower"), "expected zero or evaporation");
    }
    bool functional = false;
    if (auto* v = maybe(m, "functional")) {
        if (!v->is_boolean()) throw ConfigError(child(ptr, "functional"), "expected a boolean");
        functional = v->get<bool>();
    }
    const std::size_t mesh = maybe(m, "mesh") ? count(m["mesh"], child(ptr, "mesh"), 1) : 1400;

    try {
        BacteriaProblem prob = bacteria_build(p, mc.lower, mesh);
        cfg.n = 2;
        cfg.window = prob.window;
        cfg.y0 = prob.y0;
        cfg.field = prob.field;
        cfg.vg = prob.vg;
        cfg.bracket = functional ? bacteria_functional_bracket(p, mc.lower, mesh) : prob.bracket;
        if (functional) cfg.functional = bacteria_functional_build(p);
    } catch (const InvalidParams& e) {
        throw ConfigError(ptr, e.what());
    }
    cfg.method.mesh = mesh;
    cfg.model = mc;
}

void parse_problem(const json& pj, Config& cfg, const std::filesystem::path& base)
{
    const std::string ptr = "/problem";
    only_keys(pj, ptr, {"n", "window", "y0", "parameters", "field", "levels", "integrators"});
    cfg.n = count(need(pj, ptr, "n"), child(ptr, "n"), 1);
    const std::size_t n = cfg.n;

    if (const json* params = maybe(pj, "parameters")) {
        const std::string pp = child(ptr, "parameters");
        if (!params->is_object()) throw ConfigError(pp, "expected an object");
        for (const auto& [k, v] : params->items()) {
            const bool indexed = (k.size() > 1 && k[0] == 'y' && std::isdigit(static_cast<unsigned char>(k[1])))
                                 || (k.rfind("mean", 0) == 0 && k.size() > 4);
            if (k == "t" || k == "pi" || indexed)
                throw ConfigError(child(pp, k), "reserved name");
            cfg.parameters[k] = scalar(v, child(pp, k));
        }
    }

    const json& w = need(pj, ptr, "window");
    const std::vector<double> win = vector_of(w, child(ptr, "window"), 2, cfg.parameters);
    if (!(win[1] > win[0])) throw ConfigError(child(ptr, "window"), "window end must exceed its start");
    cfg.window = {win[0], win[1]};
    cfg.y0 = vector_of(need(pj, ptr, "y0"), child(ptr, "y0"), n, cfg.parameters);

    std::set<std::string> state_names = time_names(cfg.parameters);
    for (std::size_t i = 1; i <= n; ++i) state_names.insert("y" + std::to_string(i));
    std::set<std::string> functional_names = state_names;
    for (std::size_t i = 1; i <= n; ++i) functional_names.insert("mean" + std::to_string(i));

    const std::string fp = child(ptr, "field");
    const json& fj = need(pj, ptr, "field");
    if (!fj.is_array() || fj.size() != n) throw ConfigError(fp, "expected an array of " + std::to_string(n) + " components");
    std::vector<Expr> regular;
    std::vector<std::optional<Expr>> jumps;
    bool uses_means = false;
    auto note = [&](const Expr& e, const std::string& p) {
        check_variables(e, functional_names, p);
        for (const auto& v : e.variables()) {
            if (!state_names.count(v)) uses_means = true;
        }
    };
    for (std::size_t i = 0; i < n; ++i) {
        const std::string cp = child(fp, i);
        const json& c = fj[i];
        if (c.is_string() || c.is_number()) {
            regular.push_back(expression(c, cp));
            jumps.emplace_back();
        } else {
            only_keys(c, cp, {"f", "jump"});
            regular.push_back(expression(need(c, cp, "f"), child(cp, "f")));
            if (const json* jb = maybe(c, "jump")) jumps.push_back(expression(*jb, child(cp, "jump")));
            else jumps.emplace_back();
        }
        note(regular.back(), cp);
        if (jumps.back()) note(*jumps.back(), child(cp, "jump"));
    }
    std::vector<Expr> levels;
    if (const json* lj = maybe(pj, "levels")) {
        const std::string lp = child(ptr, "levels");
        if (!lj->is_array()) throw ConfigError(lp, "expected an array");
        for (std::size_t k = 0; k < lj->size(); ++k) {
            levels.push_back(expression((*lj)[k], child(lp, k)));
            check_variables(levels.back(), state_names, child(lp, k));
        }
    }

    try {
        if (uses_means) {
            Env zero = cfg.parameters;
            for (std::size_t i = 1; i <= n; ++i) zero["mean" + std::to_string(i)] = 0.0;
            cfg.field = Field::from_exprs(regular, jumps, zero, levels);
            const Env params = cfg.parameters;
            cfg.functional = [regular, jumps, levels, params](std::span<const RegulatedGrid> gamma) {
                Env env = params;
                for (std::size_t i = 0; i < gamma.size(); ++i) env["mean" + std::to_string(i + 1)] = grid_mean(gamma[i]);
                return Field::from_exprs(regular, jumps, env, levels);
            };
        } else {
            cfg.field = Field::from_exprs(regular, jumps, cfg.parameters, levels);
        }
    } catch (const Error& e) {
        throw ConfigError(fp, e.what());
    }

    const std::string ip = child(ptr, "integrators");
    const json& ij = need(pj, ptr, "integrators");
    if (!ij.is_array() || ij.size() != n) throw ConfigError(ip, "expected an array of " + std::to_string(n) + " drivers");
    std::vector<Integrator> gs;
    for (std::size_t i = 0; i < n; ++i) gs.push_back(integrator_from(ij[i], child(ip, i), cfg.window, cfg.parameters));
    cfg.vg = VectorIntegrator(std::move(gs));
    (void)base;
}

void parse_method(const json& m, Config& cfg)
{
    const std::string ptr = "/method";
    only_keys(m, ptr, {"scheme", "mesh", "tol", "max_iter", "direction", "window_cells", "verify_tol", "samples",
                       "seed", "outer_max"});
    MethodConfig& mc = cfg.method;
    if (auto* v = maybe(m, "scheme")) {
        try {
            mc.scheme = scheme_from_string(text(*v, child(ptr, "scheme")));
        } catch (const SchemeUnsupported& e) {
            throw ConfigError(child(ptr, "scheme"), e.what());
        }
    }
    if (auto* v = maybe(m, "mesh")) mc.mesh = count(*v, child(ptr, "mesh"), 1);
    if (auto* v = maybe(m, "tol")) mc.tol = number(*v, child(ptr, "tol"));
    if (auto* v = maybe(m, "max_iter")) mc.max_iter = count(*v, child(ptr, "max_iter"), 1);
    if (auto* v = maybe(m, "direction")) {
        const std::string d = text(*v, child(ptr, "direction"));
        if (d == "greatest") mc.direction = Direction::greatest;
        else if (d == "least") mc.direction = Direction::least;
        else throw ConfigError(child(ptr, "direction"), "expected greatest or least");
    }
    if (auto* v = maybe(m, "window_cells")) mc.window_cells = count(*v, child(ptr, "window_cells"));
    if (auto* v = maybe(m, "verify_tol")) mc.verify_tol = number(*v, child(ptr, "verify_tol"));
    if (auto* v = maybe(m, "samples")) mc.samples = count(*v, child(ptr, "samples"), 1);
    if (auto* v = maybe(m, "seed")) mc.seed = count(*v, child(ptr, "seed"));
    if (auto* v = maybe(m, "outer_max")) mc.outer_max = count(*v, child(ptr, "outer_max"), 1);
    if (!(mc.tol > 0.0)) throw ConfigError(child(ptr, "tol"), "must be positive");
    if (!(mc.verify_tol >= 0.0)) throw ConfigError(child(ptr, "verify_tol"), "must be nonnegative");
}

void parse_bracket(const json& b, Config& cfg, const std::filesystem::path& base)
{
    const std::string ptr = "/bracket";
    only_keys(b, ptr, {"alpha", "beta"});
    const std::vector<double> nodes = solver_mesh(*cfg.vg, cfg.window, cfg.method.mesh);
    Bracket br;
    for (const char* side : {"alpha", "beta"}) {
        const std::string sp = child(ptr, side);
        const json& arr = need(b, ptr, side);
        if (!arr.is_array() || arr.size() != cfg.n)
            throw ConfigError(sp, "expected an array of " + std::to_string(cfg.n) + " bounds");
        auto& out = std::string(side) == "alpha" ? br.alpha : br.beta;
        for (std::size_t i = 0; i < cfg.n; ++i) out.push_back(bound_grid(arr[i], child(sp, i), nodes, cfg.parameters, base));
    }
    try {
        validate_bracket(br);
    } catch (const Error& e) {
        throw ConfigError(ptr, e.what());
    }
    cfg.bracket = std::move(br);
}

void parse_output(const json& o, Config& cfg, const std::filesystem::path& base)
{
    const std::string ptr = "/output";
    only_keys(o, ptr, {"dir", "formats"});
    if (auto* v = maybe(o, "dir")) {
        std::filesystem::path d = text(*v, child(ptr, "dir"));
        cfg.output.dir = d.is_relative() ? base / d : d;
    }
    if (auto* v = maybe(o, "formats")) {
        const std::string fp = child(ptr, "formats");
        if (!v->is_array()) throw ConfigError(fp, "expected an array");
        cfg.output.csv = cfg.output.json = false;
        for (std::size_t k = 0; k < v->size(); ++k) {
            const std::string f = text((*v)[k], child(fp, k));
            if (f == "csv") cfg.output.csv = true;
            else if (f == "json") cfg.output.json = true;
            else throw ConfigError(child(fp, k), "expected csv or json");
        }
    }
}

} // namespace

Config parse_config(std::string_view json_text, const std::filesystem::path& base_dir)
{
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError("", std::string("malformed JSON: ") + e.what());
    }
    only_keys(doc, "", {"problem", "model", "method", "bracket", "output"});
    const bool has_problem = doc.contains("problem");
    const bool has_model = doc.contains("model");
    if (has_problem == has_model) throw ConfigError("", "exactly one of problem and model is required");

    Config cfg;
    if (const json* m = maybe(doc, "method")) parse_method(*m, cfg);
    if (has_model) {
        const std::size_t mesh_override = cfg.method.mesh;
        const bool mesh_given = doc.contains("method") && doc["method"].contains("mesh");
        parse_model(doc["model"], cfg);
        if (mesh_given) cfg.method.mesh = mesh_override;
        if (doc.contains("bracket")) throw ConfigError("/bracket", "the model builds its own bracket");
    } else {
        parse_problem(doc["problem"], cfg, base_dir);
        if (const json* b = maybe(doc, "bracket")) parse_bracket(*b, cfg, base_dir);
    }
    if (cfg.method.scheme == Scheme::rk4_density) {
        for (const auto& g : cfg.vg->components()) {
            if (!g.has_density()) throw ConfigError("/method/scheme", "rk4_density needs a density for every driver");
        }
    }
    if (const json* o = maybe(doc, "output")) parse_output(*o, cfg, base_dir);
    return cfg;
}

Config load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.parent_path());
}

Integrator parse_integrator(std::string_view json_text, Interval domain, const Env& params)
{
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error&) {
        // bare names are accepted unquoted
        j = std::string(json_text);
    }
    return integrator_from(j, "", domain, params);
}

} // namespace stieltjes
