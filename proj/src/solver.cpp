#include "stieltjes/solver.hpp"

#include "stieltjes/error.hpp"
#include "stieltjes/ksint.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace stieltjes {

std::string to_string(Scheme s)
{
    return s == Scheme::euler_g ? "euler_g" : "rk4_density";
}

Scheme scheme_from_string(std::string_view name)
{
    if (name == "euler_g") return Scheme::euler_g;
    if (name == "rk4_density") return Scheme::rk4_density;
    throw SchemeUnsupported("unknown scheme '" + std::string(name) + "'");
}

std::vector<double> solver_mesh(const VectorIntegrator& vg, Interval w, std::size_t mesh)
{
    std::vector<double> special = merged_events(vg, w.t0, w.t1);
    for (const auto& g : vg.components()) {
        for (double k : g.kinks()) {
            if (k > w.t0 && k < w.t1) special.push_back(k);
        }
    }
    std::sort(special.begin(), special.end());
    special.erase(std::unique(special.begin(), special.end()), special.end());

    const double hair = 1e-9 * w.length();
    std::vector<double> nodes = special;
    for (std::size_t k = 0; k <= mesh; ++k) {
        double t = w.t0 + w.length() * static_cast<double>(k) / static_cast<double>(mesh);
        if (k == mesh) t = w.t1;
        if (k != 0 && k != mesh) {
            auto it = std::lower_bound(special.begin(), special.end(), t);
            bool near = false;
            if (it != special.end() && std::fabs(*it - t) < hair) near = true;
            if (it != special.begin() && std::fabs(*std::prev(it) - t) < hair) near = true;
            if (near) continue;
        }
        nodes.push_back(t);
    }
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    return nodes;
}

namespace {

class Stepper {
public:
    Stepper(const Field& f, const VectorIntegrator& vg, Scheme scheme)
        : f_(f), vg_(vg), scheme_(scheme), n_(f.dim()),
          k1_(n_), k2_(n_), k3_(n_), k4_(n_), s2_(n_), s3_(n_), s4_(n_), levels0_(f.levels().size())
    {
    }

    // One step from (ta, y) to tb into `out`. Returns whether every level
    // function stays at its value at the start over all stage states.
    bool step(double ta, double tb, std::span<const double> y, std::span<double> out)
    {
        const auto levels = f_.levels();
        for (std::size_t k = 0; k < levels.size(); ++k) levels0_[k] = levels[k](ta, y);
        bool clean = true;
        if (scheme_ == Scheme::euler_g) {
            for (std::size_t i = 0; i < n_; ++i)
                out[i] = y[i] + f_.eval(i, ta, y, Side::post) * vg_[i].continuous_increment(ta, tb);
            clean = same_levels(tb, out);
            return clean;
        }
        const double h = tb - ta;
        const double tm = ta + 0.5 * h;
        slope(ta, y, Side::post, k1_);
        for (std::size_t i = 0; i < n_; ++i) s2_[i] = y[i] + 0.5 * h * k1_[i];
        clean = clean && same_levels(tm, s2_);
        slope(tm, s2_, Side::value, k2_);
        for (std::size_t i = 0; i < n_; ++i) s3_[i] = y[i] + 0.5 * h * k2_[i];
        clean = clean && same_levels(tm, s3_);
        slope(tm, s3_, Side::value, k3_);
        for (std::size_t i = 0; i < n_; ++i) s4_[i] = y[i] + h * k3_[i];
        clean = clean && same_levels(tb, s4_);
        slope(tb, s4_, Side::value, k4_);
        for (std::size_t i = 0; i < n_; ++i)
            out[i] = y[i] + h / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
        clean = clean && same_levels(tb, out);
        return clean;
    }

    // Levels at (t, y) equal those at the start of the last step.
    bool same_as_start(double t, std::span<const double> y) const { return same_levels(t, y); }

private:
    void slope(double t, std::span<const double> y, Side side, std::vector<double>& k)
    {
        for (std::size_t i = 0; i < n_; ++i) k[i] = f_.eval(i, t, y, side) * vg_[i].density(t);
    }

    bool same_levels(double t, std::span<const double> y) const
    {
        const auto levels = f_.levels();
        for (std::size_t k = 0; k < levels.size(); ++k) {
            if (!(levels[k](t, y) == levels0_[k])) return false;
        }
        return true;
    }

    const Field& f_;
    const VectorIntegrator& vg_;
    Scheme scheme_;
    std::size_t n_;
    std::vector<double> k1_, k2_, k3_, k4_, s2_, s3_, s4_;
    std::vector<double> levels0_;
};

void require_finite(std::span<const double> y, double t)
{
    for (double v : y) {
        if (!std::isfinite(v)) throw NonFiniteState(t);
    }
}

} // namespace

SolveReport solve_mde(const Field& f, const VectorIntegrator& vg, std::span<const double> y0, Interval window,
                      const SolveOptions& opts)
{
    const std::size_t n = f.dim();
    if (n == 0 || vg.size() != n || y0.size() != n)
        throw InvalidParams("field, integrator and initial value dimensions differ");
    if (opts.mesh < 1) throw InvalidParams("mesh must be at least 1");
    if (!(window.t1 > window.t0) || !vg.domain().contains(window.t0) || !vg.domain().contains(window.t1))
        throw OutOfDomain(vg.domain().contains(window.t0) ? window.t1 : window.t0);
    if (opts.scheme == Scheme::rk4_density) {
        for (const auto& g : vg.components()) {
            if (!g.has_density()) throw SchemeUnsupported("rk4_density needs a density for every integrator");
        }
    }

    const std::vector<double> base = solver_mesh(vg, window, opts.mesh);
    Stepper stepper(f, vg, opts.scheme);
    const bool track_levels = !f.levels().empty();

    SolveReport report;
    report.scheme = opts.scheme;
    report.mesh = opts.mesh;

    std::vector<double> nodes{window.t0};
    std::vector<std::vector<double>> values(n), jumps(n);
    std::vector<double> y(y0.begin(), y0.end());
    std::vector<double> pre(n), trial(n), best(n);
    require_finite(y, window.t0);
    for (std::size_t i = 0; i < n; ++i) values[i].push_back(y[i]);

    auto push_node = [&](double t, std::span<const double> state) {
        nodes.push_back(t);
        for (std::size_t i = 0; i < n; ++i) values[i].push_back(state[i]);
    };

    for (std::size_t j = 0; j + 1 < base.size(); ++j) {
        const double a = base[j];
        const double b = base[j + 1];

        // jumps at a, all from the pre-jump state
        pre = y;
        for (std::size_t i = 0; i < n; ++i) jumps[i].push_back(0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double dg = vg[i].jump_at(a);
            if (!(dg > 0.0)) continue;
            const double dy = f.eval_jump(i, a, pre) * dg;
            jumps[i].back() = dy;
            y[i] = pre[i] + dy;
            report.events.push_back({a, i, dg, dy});
        }
        require_finite(y, a);

        double t = a;
        std::size_t substeps = 0;
        // consecutive dirty steps that end on the starting level (state pinned
        // to a level boundary in floating point); the dirty width doubles
        int flicker = 0;
        while (t < b) {
            const bool clean = stepper.step(t, b, y, trial);
            if (clean || !track_levels || substeps >= opts.max_substeps) {
                require_finite(trial, b);
                y = trial;
                t = b;
                break;
            }
            ++substeps;
            double lo = 0.0;
            double hi = b - t;
            while (hi - lo > opts.crossing_tol) {
                const double mid = lo + 0.5 * (hi - lo);
                if (stepper.step(t, t + mid, y, trial)) {
                    lo = mid;
                    best = trial;
                } else {
                    hi = mid;
                }
            }
            if (lo > 0.0 && t + lo > t && t + lo < b) {
                t = t + lo;
                require_finite(best, t);
                y = best;
                for (std::size_t i = 0; i < n; ++i) jumps[i].push_back(0.0);
                push_node(t, y);
            }
            double width = std::max(hi - lo, std::ldexp(opts.crossing_tol, flicker));
            double end = t + width;
            if (!(end > t) || end >= b) end = b;
            stepper.step(t, end, y, trial);
            require_finite(trial, end);
            if (stepper.same_as_start(end, trial)) {
                flicker = std::min(flicker + 1, 60);
            } else {
                flicker = 0;
                report.crossings.push_back(t + 0.5 * (end - t));
            }
            y = trial;
            t = end;
            if (t < b) {
                for (std::size_t i = 0; i < n; ++i) jumps[i].push_back(0.0);
                push_node(t, y);
            }
        }
        push_node(b, y);
    }
    for (std::size_t i = 0; i < n; ++i) jumps[i].push_back(0.0);

    report.solution.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        report.solution.push_back(RegulatedGrid::from_jumps(nodes, std::move(values[i]), std::move(jumps[i])));
    if (opts.compute_residual) report.residual = residual_norm(f, vg, report.solution, opts.residual_tol);
    return report;
}

std::optional<double> stieltjes_derivative(const RegulatedGrid& y, const Integrator& g, double t)
{
    const Interval& dom = g.domain();
    if (!(t > dom.t0 && t < dom.t1) || !(t > y.t0() && t < y.t1())) throw OutOfDomain(t);

    const double dg = g.jump_at(t);
    if (dg > 0.0) return delta_plus(y, t) / dg;

    const double lo = std::max(dom.t0, y.t0());
    const double hi = std::min(dom.t1, y.t1());
    double h = 0.5 * std::min({t - lo, hi - t, 0.1 * (hi - lo)});
    std::optional<double> prev;
    for (int k = 0; k < 60; ++k, h *= 0.5) {
        if (!(t + h > t) || !(t - h < t)) break;
        const double den = measure_interval(g, t - h, t + h);
        // a null neighbourhood: every smaller one is null too
        if (den < 1e-14) return std::nullopt;
        const double q = (y(t + h) - y(t - h)) / den;
        if (prev && std::fabs(q - *prev) <= 1e-6 * std::max(std::fabs(q), std::fabs(*prev))) return q;
        prev = q;
    }
    throw NoConvergence("g-derivative quotients did not stabilize at t=" + format_number(t));
}

double residual_norm(const Field& f, const VectorIntegrator& vg, std::span<const RegulatedGrid> y,
                     const QuadratureOptions& opts)
{
    const std::vector<double> nodes = merge_nodes(y);
    double worst = 0.0;
    for (std::size_t i = 0; i < f.dim(); ++i) {
        const Integrand integrand = field_along(f, i, y);
        for (std::size_t j = 0; j + 1 < nodes.size(); ++j) {
            const double u = nodes[j];
            const double v = nodes[j + 1];
            const double lhs = y[i](v) - y[i](u);
            const double rhs = ks_integrate_estimate(integrand, vg[i], u, v, opts).value;
            worst = std::max(worst, std::fabs(lhs - rhs));
        }
    }
    return worst;
}

double residual_norm(const Field& f, const VectorIntegrator& vg, std::span<const RegulatedGrid> y, double tol)
{
    return residual_norm(f, vg, y, internal_quadrature(tol));
}

QuadratureOptions internal_quadrature(double abs_tol)
{
    QuadratureOptions q;
    q.abs_tol = abs_tol;
    q.rel_tol = 1e-12;
    q.strict = false;
    return q;
}

void write_solution_csv(std::ostream& os, const RegulatedGrid& y, const Integrator& g)
{
    os << "t,value,post,g_value\n";
    for (std::size_t j = 0; j < y.size(); ++j) {
        const double t = y.nodes()[j];
        os << format_number(t) << ',' << format_number(y.values()[j]) << ',' << format_number(y.posts()[j])
           << ',' << format_number(g(t)) << '\n';
    }
}

void write_trajectory_csv(std::ostream& os, std::span<const RegulatedGrid> y)
{
    os << 't';
    for (std::size_t i = 1; i <= y.size(); ++i) os << ",y" << i << ",y" << i << "_post";
    os << '\n';
    for (double t : merge_nodes(y)) {
        os << format_number(t);
        for (const auto& g : y) os << ',' << format_number(g(t)) << ',' << format_number(g.right_limit(t));
        os << '\n';
    }
}

void write_events_csv(std::ostream& os, std::span<const EventRecord> events)
{
    os << "t,i,dg,dy\n";
    for (const auto& e : events) {
        os << format_number(e.t) << ',' << (e.component + 1) << ',' << format_number(e.dg) << ','
           << format_number(e.dy) << '\n';
    }
}

} // namespace stieltjes
