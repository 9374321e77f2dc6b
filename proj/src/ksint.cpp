#include "stieltjes/ksint.hpp"

#include "stieltjes/error.hpp"

#include <algorithm>
#include <cmath>

namespace stieltjes {

namespace {

void check_window(const Integrator& g, double u, double v)
{
    if (!g.domain().contains(u)) throw OutOfDomain(u);
    if (!g.domain().contains(v)) throw OutOfDomain(v);
    if (u > v) throw ReversedInterval(u, v);
}

void append_inside(std::vector<double>& out, std::span<const double> sorted, double u, double v)
{
    for (auto it = std::upper_bound(sorted.begin(), sorted.end(), u); it != sorted.end() && *it < v; ++it)
        out.push_back(*it);
}

} // namespace

Integrand::Integrand(Regular regular, AtJump at_jump, std::vector<double> breakpoints)
    : regular_(std::move(regular))
    , at_jump_(std::move(at_jump))
    , breakpoints_(std::move(breakpoints))
{
    std::sort(breakpoints_.begin(), breakpoints_.end());
}

Integrand Integrand::from_function(std::function<double(double)> fn, std::vector<double> breakpoints)
{
    return Integrand([fn = std::move(fn)](double t, Side) { return fn(t); }, {}, std::move(breakpoints));
}

Integrand Integrand::from_expr(const Expr& e, const Env& params)
{
    TimeFunction fn(e, params);
    return Integrand([fn](double t, Side) { return fn(t); });
}

Integrand Integrand::from_grid(RegulatedGrid grid)
{
    std::vector<double> nodes(grid.nodes().begin(), grid.nodes().end());
    auto shared = std::make_shared<const RegulatedGrid>(std::move(grid));
    return Integrand([shared](double t, Side side) { return shared->eval(t, side); },
                     [shared](double t) { return (*shared)(t); }, std::move(nodes));
}

namespace {

KsEstimate continuous_estimate(const Integrand& f, const Integrator& g, double u, double v,
                               const QuadratureOptions& opts)
{
    KsEstimate out;
    if (g.ac().kind() == AcPart::Kind::none || !(v > u)) return out;

    std::vector<double> cuts;
    append_inside(cuts, g.kinks(), u, v);
    for (const Jump& j : g.jumps()) {
        if (j.time > u && j.time < v) cuts.push_back(j.time);
    }
    append_inside(cuts, f.breakpoints(), u, v);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    cuts.push_back(v);

    const bool use_density = g.has_density();
    const SidedFunction weighted = [&](double t, Side side) { return f(t, side) * g.density(t); };
    const SidedFunction plain = [&](double t, Side side) { return f(t, side); };
    const std::function<double(double)> primitive = [&](double t) { return g.continuous(t); };

    double a = u;
    for (double b : cuts) {
        QuadratureOptions piece = opts;
        piece.abs_tol = opts.abs_tol * (b - a) / (v - u);
        const QuadratureResult r = use_density ? adaptive_simpson(weighted, a, b, piece)
                                               : adaptive_stieltjes_trapezoid(plain, primitive, a, b, piece);
        if (!r.tolerance_met) {
            if (opts.strict) throw ToleranceNotMet(a, b, r.error_estimate);
            out.tolerance_met = false;
        }
        out.value += r.value;
        out.error_estimate += r.error_estimate;
        a = b;
    }
    return out;
}

} // namespace

double continuous_integral(const Integrand& f, const Integrator& g, double u, double v,
                           const QuadratureOptions& opts)
{
    check_window(g, u, v);
    return continuous_estimate(f, g, u, v, opts).value;
}

KsEstimate ks_integrate_estimate(const Integrand& f, const Integrator& g, double u, double v,
                                 const QuadratureOptions& opts)
{
    check_window(g, u, v);
    QuadratureOptions loose = opts;
    loose.strict = false;
    KsEstimate e = continuous_estimate(f, g, u, v, loose);
    for (const Jump& j : g.jumps()) {
        if (j.time >= u && j.time < v) e.value += f.at_jump(j.time) * j.size;
    }
    return e;
}

double ks_integrate(const Integrand& f, const Integrator& g, double u, double v, const QuadratureOptions& opts)
{
    check_window(g, u, v);
    double jumps = 0.0;
    for (const Jump& j : g.jumps()) {
        if (j.time >= u && j.time < v) jumps += f.at_jump(j.time) * j.size;
    }
    return continuous_integral(f, g, u, v, opts) + jumps;
}

double ks_integrate(const Integrand& f, const Integrator& g, double u, double v, double tol)
{
    QuadratureOptions opts;
    opts.abs_tol = tol;
    return ks_integrate(f, g, u, v, opts);
}

RegulatedGrid indefinite_integral(const Integrand& f, const Integrator& g, std::span<const double> mesh,
                                  const QuadratureOptions& opts)
{
    if (mesh.empty()) throw InvalidGrid("indefinite integral needs a non-empty mesh");
    for (std::size_t j = 1; j < mesh.size(); ++j) {
        if (!(mesh[j] > mesh[j - 1])) throw InvalidGrid("mesh must be strictly increasing");
    }
    for (double tau : g.jump_times(mesh.front(), mesh.back())) {
        if (!std::binary_search(mesh.begin(), mesh.end(), tau)) throw MeshMissingJump(tau);
    }

    const std::size_t m = mesh.size();
    std::vector<double> values(m, 0.0);
    std::vector<double> jumps(m, 0.0);
    for (std::size_t j = 0; j + 1 < m; ++j) {
        const double dg = g.jump_at(mesh[j]);
        if (dg > 0.0) jumps[j] = f.at_jump(mesh[j]) * dg;
        values[j + 1] = (values[j] + jumps[j]) + continuous_integral(f, g, mesh[j], mesh[j + 1], opts);
    }
    return RegulatedGrid::from_jumps(std::vector<double>(mesh.begin(), mesh.end()), std::move(values),
                                     std::move(jumps));
}

RegulatedGrid indefinite_integral(const Integrand& f, const Integrator& g, std::span<const double> mesh,
                                  double tol)
{
    QuadratureOptions opts;
    opts.abs_tol = tol;
    return indefinite_integral(f, g, mesh, opts);
}

HakeReport hake_check(const Integrand& f, const Integrator& g, double u, double v, Approach approach,
                      std::size_t seq_len, double tol)
{
    check_window(g, u, v);
    HakeReport report;
    report.integral = ks_integrate(f, g, u, v, tol);
    for (std::size_t k = 1; k <= seq_len; ++k) {
        const double offset = (v - u) * std::ldexp(1.0, -static_cast<int>(k));
        double approx = 0.0;
        double tk = 0.0;
        if (approach == Approach::right) {
            tk = u + offset;
            if (!(tk > u)) break;
            approx = ks_integrate(f, g, tk, v, tol) + f.at_jump(u) * measure_interval(g, u, tk);
        } else {
            tk = v - offset;
            if (!(tk < v)) break;
            approx = ks_integrate(f, g, u, tk, tol) + f(v, Side::value) * measure_interval(g, tk, v);
        }
        report.approach_points.push_back(tk);
        report.discrepancies.push_back(std::fabs(approx - report.integral));
    }
    report.final_discrepancy = report.discrepancies.empty() ? 0.0 : report.discrepancies.back();
    report.passed = !report.discrepancies.empty() && report.final_discrepancy < 10.0 * tol;
    return report;
}

} // namespace stieltjes
