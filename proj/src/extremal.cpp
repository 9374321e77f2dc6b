#include "stieltjes/extremal.hpp"

#include "stieltjes/error.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <memory>
#include <random>
#include <thread>

namespace stieltjes {

namespace {

constexpr std::size_t kShards = 16;

struct Worst {
    VerifyReport r;
    bool any = false;

    void add(double violation, double t, double t_end, std::size_t i, const char* check)
    {
        ++r.samples_checked;
        if (!any || violation > r.worst_violation || std::isnan(violation)) {
            if (any && std::isnan(r.worst_violation)) return;
            any = true;
            r.worst_violation = violation;
            r.t = t;
            r.t_end = t_end;
            r.component = i;
            r.check = check;
        }
    }

    void merge(const Worst& o)
    {
        const std::size_t before = r.samples_checked;
        if (o.any && (!any || o.r.worst_violation > r.worst_violation || std::isnan(o.r.worst_violation))) {
            if (!(any && std::isnan(r.worst_violation))) {
                r = o.r;
                any = true;
            }
        }
        r.samples_checked = before + o.r.samples_checked;
    }

    VerifyReport finish(double tol)
    {
        if (!any) r.worst_violation = 0.0;
        r.tolerance = tol;
        r.passed = r.worst_violation <= tol;
        return r;
    }
};

std::mt19937_64 shard_rng(std::uint64_t seed, std::size_t shard)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(shard)};
    return std::mt19937_64(seq);
}

// Runs fn(shard, worst) for every shard on up to sim_threads() workers; the
// merge happens in shard order so the outcome is thread-count independent.
template <class Fn>
Worst run_shards(Fn fn)
{
    std::vector<Worst> parts(kShards);
    const std::size_t workers = std::min(sim_threads(), kShards);
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(kShards);
    auto work = [&] {
        for (std::size_t s = next++; s < kShards; s = next++) {
            try {
                fn(s, parts[s]);
            } catch (...) {
                errors[s] = std::current_exception();
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t k = 0; k < workers; ++k) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    Worst total;
    for (const auto& p : parts) total.merge(p);
    return total;
}

std::pair<std::size_t, std::size_t> shard_range(std::size_t total, std::size_t shard)
{
    return {total * shard / kShards, total * (shard + 1) / kShards};
}

double uniform_in(std::mt19937_64& rng, double a, double b)
{
    if (!(b > a)) return a;
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    return std::min(b, a + u * (b - a));
}

QuadratureOptions verify_quadrature()
{
    return internal_quadrature(1e-11);
}

Interval bracket_domain(const Bracket& b)
{
    return {b.beta.front().t0(), b.beta.front().t1()};
}

void bounds_at(const Bracket& b, double t, Side side, std::span<double> lo, std::span<double> hi)
{
    trajectory_at(b.alpha, t, side, lo);
    trajectory_at(b.beta, t, side, hi);
}

VerifyReport verify_bound(std::span<const RegulatedGrid> cand, const Field& f, const VectorIntegrator& vg,
                          std::span<const double> y0, double tol, bool lower)
{
    const std::size_t n = f.dim();
    if (cand.size() != n || vg.size() != n || y0.size() != n)
        throw InvalidParams("candidate, field and integrator dimensions differ");
    const std::vector<double> nodes = merge_nodes(cand);
    for (double tau : merged_events(vg, nodes.front(), nodes.back())) {
        if (!std::binary_search(nodes.begin(), nodes.end(), tau)) throw MeshMissingJump(tau);
    }
    const double sign = lower ? 1.0 : -1.0;
    const QuadratureOptions q = verify_quadrature();
    Worst w;
    for (std::size_t i = 0; i < n; ++i) w.add(sign * (cand[i](nodes.front()) - y0[i]), nodes.front(), nodes.front(), i,
                                              "initial");
    for (std::size_t i = 0; i < n; ++i) {
        const Integrand integrand = field_along(f, i, cand);
        for (std::size_t j = 0; j + 1 < nodes.size(); ++j) {
            const double u = nodes[j];
            const double v = nodes[j + 1];
            const double inc = cand[i](v) - cand[i](u);
            // quadrature uncertainty is credited to the candidate
            const KsEstimate integral = ks_integrate_estimate(integrand, vg[i], u, v, q);
            w.add(sign * (inc - integral.value) - integral.error_estimate, u, v, i, "increment");

            const double jump = cand[i].right_limit(u) - cand[i](u);
            const double dg = vg[i].jump_at(u);
            const double rhs = dg > 0.0 ? integrand.at_jump(u) * dg : 0.0;
            w.add(sign * (jump - rhs), u, u, i, "jump");
        }
    }
    return w.finish(tol);
}

std::vector<double> clamp_state(std::span<const double> x, std::span<const double> lo, std::span<const double> hi)
{
    std::vector<double> out(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) out[k] = std::min(std::max(x[k], lo[k]), hi[k]);
    return out;
}

double sup_distance(std::span<const RegulatedGrid> a, std::span<const RegulatedGrid> b)
{
    std::vector<RegulatedGrid> all(a.begin(), a.end());
    all.insert(all.end(), b.begin(), b.end());
    const std::vector<double> nodes = merge_nodes(all);
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (double t : nodes) {
            d = std::max(d, std::fabs(a[i](t) - b[i](t)));
            d = std::max(d, std::fabs(a[i].right_limit(t) - b[i].right_limit(t)));
        }
    }
    return d;
}

// a <= b + tol at every node
bool ordered_below(std::span<const RegulatedGrid> a, std::span<const RegulatedGrid> b, double tol)
{
    std::vector<RegulatedGrid> all(a.begin(), a.end());
    all.insert(all.end(), b.begin(), b.end());
    for (double t : merge_nodes(all)) {
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a[i](t) > b[i](t) + tol || a[i].right_limit(t) > b[i].right_limit(t) + tol) return false;
        }
    }
    return true;
}

} // namespace

std::size_t sim_threads()
{
    if (const char* env = std::getenv("STIELTJES_SIM_THREADS")) {
        std::size_t v = 0;
        const auto res = std::from_chars(env, env + std::strlen(env), v);
        if (res.ec == std::errc() && v > 0) return v;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void validate_bracket(const Bracket& b, double tol)
{
    if (b.alpha.empty() || b.alpha.size() != b.beta.size()) throw InvalidGrid("bracket needs alpha and beta of equal dimension");
    std::vector<RegulatedGrid> all(b.alpha);
    all.insert(all.end(), b.beta.begin(), b.beta.end());
    for (const auto& g : all) {
        if (!(g.t0() == all.front().t0()) || !(g.t1() == all.front().t1()))
            throw DomainMismatch("bracket grids must share one domain");
    }
    for (double t : merge_nodes(all)) {
        for (std::size_t i = 0; i < b.dim(); ++i) {
            if (b.alpha[i](t) > b.beta[i](t) + tol || b.alpha[i].right_limit(t) > b.beta[i].right_limit(t) + tol)
                throw InvalidGrid("bracket not ordered: alpha > beta at t=" + format_number(t) + " component "
                                  + std::to_string(i + 1));
        }
    }
}

std::vector<RegulatedGrid> bracket_interpolant(const Bracket& b, std::span<const double> theta)
{
    std::vector<RegulatedGrid> all(b.alpha);
    all.insert(all.end(), b.beta.begin(), b.beta.end());
    const std::vector<double> nodes = merge_nodes(all);
    std::vector<RegulatedGrid> out;
    for (std::size_t i = 0; i < b.dim(); ++i) {
        std::vector<double> values(nodes.size());
        std::vector<double> posts(nodes.size());
        for (std::size_t j = 0; j < nodes.size(); ++j) {
            const double t = nodes[j];
            const double a = b.alpha[i](t);
            const double ap = b.alpha[i].right_limit(t);
            values[j] = a + theta[i] * (b.beta[i](t) - a);
            posts[j] = ap + theta[i] * (b.beta[i].right_limit(t) - ap);
        }
        posts.back() = values.back();
        out.push_back(RegulatedGrid::from_posts(nodes, std::move(values), std::move(posts)));
    }
    return out;
}

VerifyReport verify_lower(std::span<const RegulatedGrid> cand, const Field& f, const VectorIntegrator& vg,
                          std::span<const double> y0, double tol)
{
    return verify_bound(cand, f, vg, y0, tol, true);
}

VerifyReport verify_upper(std::span<const RegulatedGrid> cand, const Field& f, const VectorIntegrator& vg,
                          std::span<const double> y0, double tol)
{
    return verify_bound(cand, f, vg, y0, tol, false);
}

VerifyReport check_quasimonotone(const Field& f, const Bracket& bracket, std::size_t samples, std::uint64_t seed,
                                 double tol, const VectorIntegrator* vg)
{
    const std::size_t n = f.dim();
    if (bracket.dim() != n) throw InvalidParams("bracket and field dimensions differ");
    if (n < 2) return Worst{}.finish(tol);
    const Interval dom = bracket_domain(bracket);

    std::vector<std::pair<double, std::size_t>> events;
    if (vg) {
        for (std::size_t i = 0; i < n; ++i) {
            for (double tau : (*vg)[i].jump_times(dom.t0, dom.t1)) events.emplace_back(tau, i);
        }
    }
    constexpr std::size_t kPerEvent = 16;

    Worst w = run_shards([&](std::size_t shard, Worst& out) {
        auto rng = shard_rng(seed, shard);
        std::vector<double> lo(n), hi(n), x(n), y(n);
        auto draw_pair = [&](std::size_t i) {
            for (std::size_t k = 0; k < n; ++k) {
                const double p = uniform_in(rng, lo[k], hi[k]);
                const double q = uniform_in(rng, lo[k], hi[k]);
                x[k] = std::min(p, q);
                y[k] = std::max(p, q);
            }
            x[i] = y[i] = uniform_in(rng, lo[i], hi[i]);
        };
        const auto [s0, s1] = shard_range(samples, shard);
        for (std::size_t s = s0; s < s1; ++s) {
            const double t = uniform_in(rng, dom.t0, dom.t1);
            bounds_at(bracket, t, Side::value, lo, hi);
            for (std::size_t i = 0; i < n; ++i) {
                draw_pair(i);
                out.add(f.eval(i, t, x) - f.eval(i, t, y), t, t, i, "quasimonotone");
            }
        }
        const auto [e0, e1] = shard_range(events.size(), shard);
        for (std::size_t e = e0; e < e1; ++e) {
            const auto [tau, i] = events[e];
            bounds_at(bracket, tau, Side::value, lo, hi);
            for (std::size_t k = 0; k < kPerEvent; ++k) {
                draw_pair(i);
                out.add(f.eval_jump(i, tau, x) - f.eval_jump(i, tau, y), tau, tau, i, "quasimonotone_jump");
            }
        }
    });
    return w.finish(tol);
}

VerifyReport check_jump_monotone(const Field& f, const VectorIntegrator& vg, const Bracket& bracket,
                                 std::size_t u_samples, std::size_t eta_samples, std::uint64_t seed, double tol)
{
    const std::size_t n = f.dim();
    if (bracket.dim() != n || vg.size() != n) throw InvalidParams("bracket, field and integrator dimensions differ");
    const Interval dom = bracket_domain(bracket);
    const std::size_t m = std::max<std::size_t>(u_samples, 2);
    auto rng = shard_rng(seed, 0);
    Worst w;
    std::vector<double> lo(n), hi(n), eta(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (const Jump& jp : vg[i].jumps()) {
            const double tau = jp.time;
            if (tau < dom.t0 || tau >= dom.t1) continue;
            bounds_at(bracket, tau, Side::value, lo, hi);
            for (std::size_t e = 0; e < eta_samples + 2; ++e) {
                for (std::size_t k = 0; k < n; ++k) {
                    eta[k] = e == 0 ? lo[k] : e == 1 ? hi[k] : uniform_in(rng, lo[k], hi[k]);
                }
                double prev = 0.0;
                for (std::size_t k = 0; k < m; ++k) {
                    const double u = k + 1 == m ? hi[i] : lo[i] + (hi[i] - lo[i]) * static_cast<double>(k)
                                                                     / static_cast<double>(m - 1);
                    eta[i] = u;
                    const double phi = u + f.eval_jump(i, tau, eta) * jp.size;
                    if (k > 0) w.add(prev - phi, tau, tau, i, "jump_monotone");
                    prev = phi;
                }
            }
        }
    }
    return w.finish(tol);
}

VerifyReport check_domination(const Field& f, const VectorIntegrator& vg, const Bracket& bracket,
                              const DominatingBound& M, double tol, std::size_t eta_samples, std::uint64_t seed)
{
    const std::size_t n = f.dim();
    if (bracket.dim() != n || vg.size() != n || M.M.size() != n)
        throw InvalidParams("bracket, field, integrator and bound dimensions differ");
    auto rng = shard_rng(seed, 0);
    const QuadratureOptions q = verify_quadrature();
    Worst w;
    std::vector<double> theta(n);
    for (std::size_t e = 0; e < eta_samples + 2; ++e) {
        for (std::size_t k = 0; k < n; ++k) theta[k] = e == 0 ? 0.0 : e == 1 ? 1.0 : uniform_in(rng, 0.0, 1.0);
        const std::vector<RegulatedGrid> eta = bracket_interpolant(bracket, theta);
        const auto nodes = eta.front().nodes();
        for (std::size_t i = 0; i < n; ++i) {
            for (double t : nodes) {
                if (M.M[i](t) < 0.0 || M.M[i](t, Side::post) < 0.0)
                    throw InvalidParams("dominating bound is negative at t=" + format_number(t));
            }
            const Integrand integrand = field_along(f, i, eta);
            for (std::size_t j = 0; j + 1 < nodes.size(); ++j) {
                const double u = nodes[j];
                const double v = nodes[j + 1];
                const KsEstimate in = ks_integrate_estimate(integrand, vg[i], u, v, q);
                const KsEstimate bound = ks_integrate_estimate(M.M[i], vg[i], u, v, q);
                const double lhs = std::fabs(in.value) - in.error_estimate;
                const double rhs = bound.value + bound.error_estimate;
                w.add(lhs - rhs, u, v, i, "domination");
            }
        }
    }
    return w.finish(tol);
}

Field truncate_field(const Field& f, const Bracket& bracket)
{
    const std::size_t n = f.dim();
    if (bracket.dim() != n) throw InvalidParams("bracket and field dimensions differ");
    auto br = std::make_shared<const Bracket>(bracket);
    auto fp = std::make_shared<const Field>(f);
    auto clamped = [br, n](double t, std::span<const double> x, Side side) {
        std::vector<double> lo(n), hi(n);
        bounds_at(*br, t, side, lo, hi);
        return clamp_state(x, lo, hi);
    };
    std::vector<Field::Component> comps;
    for (std::size_t i = 0; i < n; ++i) {
        Field::Component c;
        c.regular = [fp, clamped, i](double t, std::span<const double> x, Side side) {
            return fp->eval(i, t, clamped(t, x, side), side);
        };
        if (f.has_jump_branch(i)) {
            c.jump = [fp, clamped, i](double t, std::span<const double> x) {
                return fp->eval_jump(i, t, clamped(t, x, Side::value));
            };
        }
        comps.push_back(std::move(c));
    }
    std::vector<Field::Level> levels;
    for (const auto& lv : f.levels()) {
        levels.push_back([lv, clamped](double t, std::span<const double> x) {
            return lv(t, clamped(t, x, Side::value));
        });
    }
    return Field(std::move(comps), std::move(levels));
}

std::string to_string(Direction d)
{
    return d == Direction::greatest ? "greatest" : "least";
}

std::string to_string(IterationStatus s)
{
    switch (s) {
    case IterationStatus::converged: return "converged";
    case IterationStatus::max_iter_exceeded: return "max_iter_exceeded";
    case IterationStatus::bracket_violation: return "bracket_violation";
    }
    return "unknown";
}

std::string to_string(OuterStatus s)
{
    return s == OuterStatus::converged ? "converged" : "outer_max_exceeded";
}

ExtremalReport extremal_solve(const Field& f, const VectorIntegrator& vg, std::span<const double> y0,
                              const Bracket& bracket, Interval window, const ExtremalOptions& opts)
{
    const std::size_t n = f.dim();
    if (bracket.dim() != n || vg.size() != n || y0.size() != n)
        throw InvalidParams("bracket, field, integrator and initial value dimensions differ");
    if (opts.mesh < 1) throw InvalidParams("mesh must be at least 1");
    validate_bracket(bracket);

    std::vector<double> mesh = solver_mesh(vg, window, opts.mesh);
    for (const auto* side : {&bracket.alpha, &bracket.beta}) {
        for (const auto& g : *side) {
            for (std::size_t j = 0; j < g.size(); ++j) {
                const double t = g.nodes()[j];
                if (g.jumps()[j] != 0.0 && t > window.t0 && t < window.t1) mesh.push_back(t);
            }
        }
    }
    std::sort(mesh.begin(), mesh.end());
    mesh.erase(std::unique(mesh.begin(), mesh.end()), mesh.end());
    const std::size_t m = mesh.size();

    using Table = std::vector<std::vector<double>>;
    Table lo_v(n, std::vector<double>(m)), lo_p = lo_v, hi_v = lo_v, hi_p = lo_v;
    bool degenerate = true;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            lo_v[i][j] = bracket.alpha[i](mesh[j]);
            hi_v[i][j] = bracket.beta[i](mesh[j]);
            const bool last = j + 1 == m;
            lo_p[i][j] = last ? lo_v[i][j] : bracket.alpha[i].right_limit(mesh[j]);
            hi_p[i][j] = last ? hi_v[i][j] : bracket.beta[i].right_limit(mesh[j]);
            if (lo_v[i][j] != hi_v[i][j] || lo_p[i][j] != hi_p[i][j]) degenerate = false;
        }
    }

    ExtremalReport report;
    report.result.mesh = opts.mesh;
    Table fin_v = opts.direction == Direction::greatest ? hi_v : lo_v;
    Table fin_p = opts.direction == Direction::greatest ? hi_p : lo_p;

    if (!degenerate) {
        const Field ft = truncate_field(f, bracket);
        QuadratureOptions q;
        q.abs_tol = opts.quad_tol;
        q.rel_tol = 1e-12;
        q.strict = false;
        const std::size_t wc = opts.window_cells == 0 ? m - 1 : opts.window_cells;
        std::vector<double> y_start(y0.begin(), y0.end());
        bool exhausted = false;

        for (std::size_t s = 0; s + 1 < m; s += wc) {
            const std::size_t e = std::min(s + wc, m - 1);
            const std::size_t len = e - s + 1;
            const std::vector<double> sub(mesh.begin() + static_cast<std::ptrdiff_t>(s),
                                          mesh.begin() + static_cast<std::ptrdiff_t>(e + 1));
            Table cur_v(n), cur_p(n);
            for (std::size_t i = 0; i < n; ++i) {
                cur_v[i].assign(fin_v[i].begin() + s, fin_v[i].begin() + e + 1);
                cur_p[i].assign(fin_p[i].begin() + s, fin_p[i].begin() + e + 1);
                cur_v[i][0] = y_start[i];
                cur_p[i][len - 1] = cur_v[i][len - 1];
            }
            bool converged = false;
            double escape = 0.0;
            for (std::size_t k = 0; k < opts.max_iter; ++k) {
                std::vector<RegulatedGrid> traj;
                for (std::size_t i = 0; i < n; ++i) traj.push_back(RegulatedGrid::from_posts(sub, cur_v[i], cur_p[i]));
                Table new_v(n, std::vector<double>(len)), new_p = new_v;
                escape = 0.0;
                double change = 0.0;
                bool ordered = true;
                for (std::size_t i = 0; i < n; ++i) {
                    const RegulatedGrid h = indefinite_integral(field_along(ft, i, traj), vg[i], sub, q);
                    for (std::size_t j = 0; j < len; ++j) {
                        const std::size_t J = s + j;
                        double v = y_start[i] + h.values()[j];
                        double p = j + 1 == len ? v : y_start[i] + h.posts()[j];
                        if (!std::isfinite(v) || !std::isfinite(p)) throw NonFiniteState(sub[j]);
                        escape = std::max({escape, lo_v[i][J] - v, v - hi_v[i][J]});
                        if (j + 1 < len) escape = std::max({escape, lo_p[i][J] - p, p - hi_p[i][J]});
                        v = std::min(std::max(v, lo_v[i][J]), hi_v[i][J]);
                        if (j + 1 < len) p = std::min(std::max(p, lo_p[i][J]), hi_p[i][J]);
                        else p = v;
                        change = std::max({change, std::fabs(v - cur_v[i][j]), std::fabs(p - cur_p[i][j])});
                        if (opts.direction == Direction::greatest) {
                            if (v > cur_v[i][j] + opts.tol || p > cur_p[i][j] + opts.tol) ordered = false;
                        } else if (v < cur_v[i][j] - opts.tol || p < cur_p[i][j] - opts.tol) {
                            ordered = false;
                        }
                        new_v[i][j] = v;
                        new_p[i][j] = p;
                    }
                }
                cur_v = std::move(new_v);
                cur_p = std::move(new_p);
                report.changes.push_back(change);
                ++report.iterations;
                if (!ordered) report.monotone = false;
                if (change < opts.tol) {
                    converged = true;
                    break;
                }
            }
            if (!converged) exhausted = true;
            report.bracket_escape = std::max(report.bracket_escape, escape);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < len; ++j) {
                    fin_v[i][s + j] = cur_v[i][j];
                    if (j + 1 < len) fin_p[i][s + j] = cur_p[i][j];
                }
                y_start[i] = cur_v[i][len - 1];
            }
        }
        for (std::size_t i = 0; i < n; ++i) fin_p[i][m - 1] = fin_v[i][m - 1];
        if (exhausted) report.status = IterationStatus::max_iter_exceeded;
        else if (report.bracket_escape > opts.tol) report.status = IterationStatus::bracket_violation;
    }

    for (std::size_t i = 0; i < n; ++i)
        report.result.solution.push_back(RegulatedGrid::from_posts(mesh, fin_v[i], fin_p[i]));
    for (double tau : merged_events(vg, window.t0, window.t1)) {
        for (std::size_t i = 0; i < n; ++i) {
            const double dg = vg[i].jump_at(tau);
            if (dg > 0.0) report.result.events.push_back({tau, i, dg, delta_plus(report.result.solution[i], tau)});
        }
    }
    if (opts.compute_residual) report.result.residual = residual_norm(f, vg, report.result.solution, internal_quadrature(opts.quad_tol));
    return report;
}

VerifyReport check_functional_monotone(const FunctionalField& F, const VectorIntegrator& vg, const Bracket& bracket,
                                       std::size_t pairs, std::size_t points, std::uint64_t seed, double tol)
{
    const std::size_t n = bracket.dim();
    const Interval dom = bracket_domain(bracket);
    auto rng = shard_rng(seed, 0);
    Worst w;
    std::vector<double> ta(n), tb(n), lo(n), hi(n), x(n);
    for (std::size_t p = 0; p < pairs; ++p) {
        for (std::size_t k = 0; k < n; ++k) {
            const double a = uniform_in(rng, 0.0, 1.0);
            const double b = uniform_in(rng, 0.0, 1.0);
            ta[k] = p == 0 ? 0.0 : std::min(a, b);
            tb[k] = p == 0 ? 1.0 : std::max(a, b);
        }
        const Field fa = F(bracket_interpolant(bracket, ta));
        const Field fb = F(bracket_interpolant(bracket, tb));
        for (std::size_t s = 0; s < points; ++s) {
            const double t = uniform_in(rng, dom.t0, dom.t1);
            bounds_at(bracket, t, Side::value, lo, hi);
            for (std::size_t k = 0; k < n; ++k) x[k] = uniform_in(rng, lo[k], hi[k]);
            for (std::size_t i = 0; i < n; ++i) w.add(fa.eval(i, t, x) - fb.eval(i, t, x), t, t, i, "functional");
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (double tau : vg[i].jump_times(dom.t0, dom.t1)) {
                bounds_at(bracket, tau, Side::value, lo, hi);
                for (std::size_t k = 0; k < n; ++k) x[k] = uniform_in(rng, lo[k], hi[k]);
                w.add(fa.eval_jump(i, tau, x) - fb.eval_jump(i, tau, x), tau, tau, i, "functional_jump");
            }
        }
    }
    return w.finish(tol);
}

FunctionalReport functional_extremal(const FunctionalField& F, const VectorIntegrator& vg, std::span<const double> y0,
                                     const Bracket& bracket, Interval window, const FunctionalOptions& opts)
{
    FunctionalReport report;
    report.h5 = check_functional_monotone(F, vg, bracket, opts.h5_pairs, opts.h5_points, opts.seed, opts.h5_tol);
    const bool greatest = opts.inner.direction == Direction::greatest;
    std::vector<RegulatedGrid> gamma = greatest ? bracket.beta : bracket.alpha;
    report.status = OuterStatus::outer_max_exceeded;
    ExtremalOptions inner = opts.inner;
    inner.compute_residual = false;
    for (std::size_t m = 0; m < opts.outer_max; ++m) {
        ExtremalReport r = extremal_solve(F(gamma), vg, y0, bracket, window, inner);
        const double change = sup_distance(r.result.solution, gamma);
        const bool ordered = greatest ? ordered_below(r.result.solution, gamma, opts.outer_tol)
                                      : ordered_below(gamma, r.result.solution, opts.outer_tol);
        if (!ordered) report.monotone = false;
        gamma = r.result.solution;
        report.inner = std::move(r);
        report.outer_changes.push_back(change);
        ++report.outer_iterations;
        if (change < opts.outer_tol) {
            report.status = OuterStatus::converged;
            break;
        }
    }
    report.residual = residual_norm(F(gamma), vg, gamma, internal_quadrature(opts.inner.quad_tol));
    report.inner.result.residual = report.residual;
    return report;
}

double grid_trapezoid(const RegulatedGrid& y, double u, double v)
{
    if (u > v) throw ReversedInterval(u, v);
    const auto nodes = y.nodes();
    double total = 0.0;
    double a = u;
    auto it = std::upper_bound(nodes.begin(), nodes.end(), u);
    while (a < v) {
        const double b = (it != nodes.end() && *it < v) ? *it : v;
        total += 0.5 * (y.eval(a, Side::post) + y.eval(b, Side::value)) * (b - a);
        a = b;
        if (it != nodes.end()) ++it;
    }
    return total;
}

double grid_mean(const RegulatedGrid& y)
{
    return grid_trapezoid(y, y.t0(), y.t1()) / (y.t1() - y.t0());
}

} // namespace stieltjes
