#include "stieltjes/models.hpp"

#include "stieltjes/error.hpp"
#include "stieltjes/quadrature.hpp"
#include "stieltjes/solver.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

namespace stieltjes {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDay = 2.0 / kPi;

// int_{2k}^{2k+s} sin+(pi u) du for s in [0, 2]
double day_integral(double s)
{
    return s <= 1.0 ? (1.0 - std::cos(kPi * s)) / kPi : kDay;
}

bool is_refill(double t, double T)
{
    if (!(t >= 2.0) || t > T) return false;
    const double k = std::round(t / 2.0);
    return 2.0 * k == t;
}

Field bacteria_field(const BacteriaParams& p, std::function<double(double, double)> refill_factor)
{
    const double r = p.r;
    const double c = p.c;
    const double L = p.L;
    const CarryingCapacity N = p.N;
    Field::Component growth;
    growth.regular = [r, N](double, std::span<const double> y, Side) { return r * y[0] * (N(y[1]) - y[0]); };
    Field::Component water;
    water.regular = [c](double, std::span<const double>, Side) { return -c; };
    water.jump = [refill_factor = std::move(refill_factor), L](double t, std::span<const double> y) {
        return std::min(refill_factor(t, y[0]) * y[1], 2.0 * L - y[1]);
    };
    std::vector<Field::Level> levels;
    if (N.kind == CarryingCapacity::Kind::floor)
        levels.push_back([](double, std::span<const double> y) { return std::floor(y[1]); });
    return Field({growth, water}, std::move(levels));
}

// Times in [u, v] where floor(w) changes, w continuous and monotone on (u, v].
void floor_changes(const std::function<double(double)>& w, double u, double fu, double v, double fv, double width,
                   std::vector<double>& out)
{
    if (fu == fv) return;
    if (v - u <= width) {
        out.push_back(u + 0.5 * (v - u));
        return;
    }
    const double m = u + 0.5 * (v - u);
    const double fm = std::floor(w(m));
    floor_changes(w, u, fu, m, fm, width, out);
    floor_changes(w, m, fm, v, fv, width, out);
}

enum class AnchorRule { pointwise, day_integral };

// beta = (p0 exp(int r N(W)), W) built node by node so each refill anchor is
// read from the part of beta_1 already constructed.
std::vector<RegulatedGrid> build_beta(const BacteriaParams& p, const std::vector<double>& nodes, AnchorRule rule)
{
    auto anchors = std::make_shared<std::vector<double>>();
    const std::size_t m = nodes.size();
    std::vector<double> b1(m), w_val(m), w_post(m);
    QuadratureOptions q;
    q.abs_tol = 1e-14;
    q.rel_tol = 1e-14;
    double log_growth = 0.0;
    b1[0] = p.p0;
    const bool piecewise = p.N.kind == CarryingCapacity::Kind::floor;
    const SidedFunction rate = [&](double s, Side) { return p.r * p.N(bacteria_W(p, s, *anchors)); };

    for (std::size_t j = 0; j < m; ++j) {
        const double t = nodes[j];
        w_val[j] = bacteria_W(p, t, *anchors);
        if (is_refill(t, p.T) && j + 1 < m) {
            double anchor = b1[j];
            if (rule == AnchorRule::day_integral) {
                anchor = 0.0;
                for (std::size_t k = 0; k < j; ++k) {
                    if (nodes[k] >= t - 2.0) anchor += 0.5 * (b1[k] + b1[k + 1]) * (nodes[k + 1] - nodes[k]);
                }
            }
            anchors->push_back(anchor);
        }
        w_post[j] = j + 1 < m && is_refill(t, p.T) ? bacteria_W(p, std::nextafter(t, t + 1.0), *anchors) : w_val[j];
        if (j + 1 == m) break;

        const double u = t;
        const double v = nodes[j + 1];
        std::vector<double> cuts{u};
        if (piecewise) {
            const auto wfn = [&](double s) { return bacteria_W(p, s, *anchors); };
            floor_changes(wfn, u, std::floor(w_post[j]), v, std::floor(wfn(v)), 1e-13, cuts);
        }
        cuts.push_back(v);
        double integral = 0.0;
        for (std::size_t k = 0; k + 1 < cuts.size(); ++k) integral += adaptive_simpson(rate, cuts[k], cuts[k + 1], q).value;
        log_growth += integral;
        b1[j + 1] = p.p0 * std::exp(log_growth);
    }

    // refill posts from the closed form at 2k+, exactly min((1+floor(a A)) w, 2L)
    for (std::size_t j = 0; j + 1 < m; ++j) {
        if (!is_refill(nodes[j], p.T)) continue;
        const auto k = static_cast<std::size_t>(std::lround(nodes[j] / 2.0));
        w_post[j] = std::min((1.0 + std::floor(p.a * (*anchors)[k - 1])) * w_val[j], 2.0 * p.L);
    }

    auto params = std::make_shared<const BacteriaParams>(p);
    std::vector<RegulatedGrid> beta;
    beta.push_back(RegulatedGrid::continuous(nodes, std::move(b1)));
    beta.push_back(RegulatedGrid::from_posts(nodes, std::move(w_val), std::move(w_post),
                                             [params, anchors](double s) { return bacteria_W(*params, s, *anchors); }));
    return beta;
}

std::vector<RegulatedGrid> build_alpha(const BacteriaParams& p, const std::vector<double>& nodes, LowerOption lower)
{
    std::vector<RegulatedGrid> alpha;
    alpha.push_back(RegulatedGrid::constant(0.0, nodes));
    if (lower == LowerOption::zero) {
        alpha.push_back(RegulatedGrid::constant(0.0, nodes));
    } else {
        const double c = p.c;
        alpha.push_back(RegulatedGrid::sample([c](double t) { return -c * bacteria_Gc(t); }, nodes));
    }
    return alpha;
}

double logistic(double N, double r, double p_i, double dt)
{
    if (N == 0.0) return p_i / (1.0 + r * p_i * dt);
    return 1.0 / (std::exp(-N * r * dt) * (1.0 / p_i - 1.0 / N) + 1.0 / N);
}

} // namespace

double CarryingCapacity::operator()(double w) const
{
    switch (kind) {
    case Kind::floor: return std::floor(w);
    case Kind::linear: return slope * w;
    case Kind::expr: {
        Env env{{"w", w}};
        return eval(*expr, env);
    }
    }
    return 0.0;
}

std::string CarryingCapacity::name() const
{
    switch (kind) {
    case Kind::floor: return "floor";
    case Kind::linear: return "linear";
    case Kind::expr: return expr ? to_string(*expr) : "expr";
    }
    return "?";
}

void validate(const BacteriaParams& p)
{
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) throw InvalidParams(std::string(name) + " must be positive and finite");
    };
    positive(p.L, "L");
    positive(p.c, "c");
    positive(p.r, "r");
    positive(p.p0, "p0");
    positive(p.T, "T");
    if (!std::isfinite(p.a)) throw InvalidParams("a must be finite");
    if (p.N.kind == CarryingCapacity::Kind::expr && !p.N.expr) throw InvalidParams("N expression missing");
    constexpr int kSamples = 1001;
    double prev = p.N(-1.0);
    for (int k = 1; k < kSamples; ++k) {
        const double w = -1.0 + (2.0 * p.L + 2.0) * k / (kSamples - 1);
        const double v = p.N(w);
        if (!std::isfinite(v) || v < prev) throw InvalidParams("N must be nondecreasing (fails near w=" + format_number(w) + ")");
        prev = v;
    }
}

double bacteria_Gc(double t)
{
    const double k = std::floor(t / 2.0);
    return k * kDay + day_integral(t - 2.0 * k);
}

double bacteria_density(double t)
{
    return std::max(std::sin(kPi * t), 0.0);
}

Integrator bacteria_g(double T)
{
    std::vector<double> kinks;
    for (double k = 1.0; k < T; k += 1.0) kinks.push_back(k);
    return Integrator({0.0, T}, AcPart::from_primitive(bacteria_Gc, bacteria_density, std::move(kinks)),
                      periodic_jumps(2.0, 2.0, 1.0, T));
}

double bacteria_W(const BacteriaParams& p, double t, std::span<const double> anchors)
{
    if (t <= 2.0) return p.L - p.c * day_integral(t);
    const auto k = static_cast<std::size_t>(std::ceil(t / 2.0)) - 1;
    if (k > anchors.size()) throw MissingAnchors("W at t=" + format_number(t) + " needs " + std::to_string(k) + " anchors");
    double w = p.L;
    for (std::size_t j = 1; j <= k; ++j) {
        const double before = w - p.c * kDay;
        w = std::min((1.0 + std::floor(p.a * anchors[j - 1])) * before, 2.0 * p.L);
    }
    return w - p.c * day_integral(t - 2.0 * static_cast<double>(k));
}

BacteriaProblem bacteria_build(const BacteriaParams& params, LowerOption lower, std::size_t mesh)
{
    validate(params);
    const double a = params.a;
    Field field = bacteria_field(params, [a](double, double p) { return std::floor(a * p); });
    VectorIntegrator vg({Integrator({0.0, params.T}, AcPart::identity()), bacteria_g(params.T)});
    const Interval window{0.0, params.T};
    const std::vector<double> nodes = solver_mesh(vg, window, mesh);
    Bracket bracket{build_alpha(params, nodes, lower), build_beta(params, nodes, AnchorRule::pointwise)};
    return {std::move(field), std::move(vg), {params.p0, params.L}, std::move(bracket), window};
}

double bacteria_p_closed_form(const BacteriaParams& params, std::span<const FloorSegment> segments, double t)
{
    if (segments.empty() || t < segments.front().t || t > params.T) throw SegmentNotFound(t);
    double p_i = params.p0;
    for (std::size_t i = 0; i < segments.size(); ++i) {
        const double ti = segments[i].t;
        const double next = i + 1 < segments.size() ? segments[i + 1].t : params.T;
        if (t == ti) return p_i;
        if (t <= next) return logistic(segments[i].N, params.r, p_i, t - ti);
        p_i = logistic(segments[i].N, params.r, p_i, next - ti);
    }
    throw SegmentNotFound(t);
}

std::vector<double> bacteria_level_crossings(const BacteriaParams&, const RegulatedGrid& w)
{
    std::vector<double> out;
    const auto nodes = w.nodes();
    const std::function<double(double)> inner = [&w](double s) { return w(s); };
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        if (std::floor(w.posts()[j]) != std::floor(w.values()[j])) out.push_back(nodes[j]);
        if (j + 1 == nodes.size()) break;
        floor_changes(inner, nodes[j], std::floor(w.posts()[j]), nodes[j + 1], std::floor(w.values()[j + 1]), 1e-10,
                      out);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<FloorSegment> bacteria_floor_segments(const BacteriaParams& params, const RegulatedGrid& w)
{
    std::vector<double> starts{w.t0()};
    for (double t : bacteria_level_crossings(params, w)) {
        if (t > starts.back() && t < w.t1()) starts.push_back(t);
    }
    std::vector<FloorSegment> segs;
    for (std::size_t i = 0; i < starts.size(); ++i) {
        const double end = i + 1 < starts.size() ? starts[i + 1] : w.t1();
        segs.push_back({starts[i], std::floor(w(starts[i] + 0.5 * (end - starts[i])))});
    }
    return segs;
}

FunctionalField bacteria_functional_build(const BacteriaParams& params)
{
    validate(params);
    if (params.a < 0.0) throw InvalidParams("the functional variant needs a >= 0");
    return [params](std::span<const RegulatedGrid> gamma) {
        auto day = std::make_shared<std::vector<double>>();
        const RegulatedGrid& p = gamma[0];
        for (double t = 2.0; t <= std::min(params.T, p.t1()); t += 2.0) day->push_back(grid_trapezoid(p, t - 2.0, t));
        const double a = params.a;
        return bacteria_field(params, [day, a](double t, double) {
            const auto n = static_cast<std::size_t>(std::lround(t / 2.0));
            if (n == 0 || n > day->size()) return 0.0;
            return std::floor(a * (*day)[n - 1]);
        });
    };
}

Bracket bacteria_functional_bracket(const BacteriaParams& params, LowerOption lower, std::size_t mesh)
{
    validate(params);
    VectorIntegrator vg({Integrator({0.0, params.T}, AcPart::identity()), bacteria_g(params.T)});
    const std::vector<double> nodes = solver_mesh(vg, {0.0, params.T}, mesh);
    return {build_alpha(params, nodes, lower), build_beta(params, nodes, AnchorRule::day_integral)};
}

} // namespace stieltjes
