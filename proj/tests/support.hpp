// Independent oracles and random problem generators for the test suites.
// Nothing here calls library quadrature or stepping code.
#ifndef STIELTJES_TESTS_SUPPORT_HPP
#define STIELTJES_TESTS_SUPPORT_HPP

#include "stieltjes/integrator.hpp"
#include "stieltjes/ksint.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace oracle {

using Fn = std::function<double(double)>;

struct JumpSpec {
    double t;
    double size;
};

// Left-tag Riemann-Stieltjes sums of f against a smooth G on [a, b],
// S(h) = sum f(t_k) (G(t_{k+1}) - G(t_k)), refined by halving h and
// accelerated by Richardson extrapolation (S(h) = I + c1 h + c2 h^2 + ...).
// Stops when successive extrapolated values agree to `tol`.
inline double left_sum_piece(const Fn& f, const Fn& G, double a, double b, double tol = 1e-10)
{
    if (!(b > a)) return 0.0;
    std::vector<std::vector<double>> T;
    std::size_t n = 4;
    double prev = 0.0;
    for (int k = 0; k < 20; ++k, n *= 2) {
        const double h = (b - a) / static_cast<double>(n);
        double s = 0.0;
        double Gl = G(a);
        for (std::size_t j = 0; j < n; ++j) {
            const double tl = a + h * static_cast<double>(j);
            const double tr = j + 1 == n ? b : a + h * static_cast<double>(j + 1);
            const double Gr = G(tr);
            s += f(tl) * (Gr - Gl);
            Gl = Gr;
        }
        std::vector<double> row{s};
        for (std::size_t j = 1; j <= static_cast<std::size_t>(k); ++j) {
            const double p = std::ldexp(1.0, static_cast<int>(j)) - 1.0;
            row.push_back(row[j - 1] + (row[j - 1] - T.back()[j - 1]) / p);
        }
        T.push_back(row);
        const double best = row.back();
        if (k >= 3 && std::fabs(best - prev) <= tol * std::max(1.0, std::fabs(best))) return best;
        prev = best;
    }
    return prev;
}

// Kurzweil-Stieltjes integral over [u, v]: pieces between breakpoints, plus
// f(tau) * size for jumps in [u, v).
inline double ks(const Fn& f, const Fn& Gc, const std::vector<JumpSpec>& jumps, std::vector<double> cuts, double u,
                 double v)
{
    for (const auto& j : jumps) cuts.push_back(j.t);
    std::vector<double> pts{u};
    for (double c : cuts) {
        if (c > u && c < v) pts.push_back(c);
    }
    pts.push_back(v);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) total += left_sum_piece(f, Gc, pts[k], pts[k + 1]);
    for (const auto& j : jumps) {
        if (j.t >= u && j.t < v) total += f(j.t) * j.size;
    }
    return total;
}

inline double logistic(double r, double N, double p0, double t)
{
    return N / (1.0 + (N - p0) / p0 * std::exp(-N * r * t));
}

// Classical RK4 on y' = F(t, y) with uniform steps.
inline std::vector<double> rk4(const std::function<std::vector<double>(double, const std::vector<double>&)>& F,
                               std::vector<double> y, double t0, double t1, std::size_t steps)
{
    const double h = (t1 - t0) / static_cast<double>(steps);
    for (std::size_t k = 0; k < steps; ++k) {
        const double t = t0 + h * static_cast<double>(k);
        auto axpy = [&](const std::vector<double>& a, double s) {
            std::vector<double> out(y.size());
            for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i] + s * a[i];
            return out;
        };
        const auto k1 = F(t, y);
        const auto k2 = F(t + 0.5 * h, axpy(k1, 0.5 * h));
        const auto k3 = F(t + 0.5 * h, axpy(k2, 0.5 * h));
        const auto k4 = F(t + h, axpy(k3, h));
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    return y;
}

// A random driver together with its closed-form continuous part.
struct RandomDriver {
    stieltjes::Integrator g;
    Fn Gc;
    std::vector<JumpSpec> jumps;
    std::vector<double> kinks;
    std::string kind;
};

// A random integrand with its expression text (for CLI or Expr use).
struct RandomIntegrand {
    Fn f;
    std::string text;
};

inline RandomDriver random_driver(std::mt19937_64& rng, stieltjes::Interval dom, std::size_t max_jumps = 4)
{
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const int kind = static_cast<int>(U(rng) * 4.0);
    const double a0 = 0.2 + U(rng);
    const double a1 = U(rng);
    const double w = 0.5 + 3.0 * U(rng);
    const double t0 = dom.t0;

    RandomDriver d{stieltjes::Integrator(dom, stieltjes::AcPart::none()), {}, {}, {}, {}};
    stieltjes::AcPart ac = stieltjes::AcPart::none();
    switch (kind) {
    case 0: { // density a0 + a1 sin^2(w t), library integrates it itself
        auto dens = [=](double t) { return a0 + a1 * std::sin(w * t) * std::sin(w * t); };
        d.Gc = [=](double t) {
            auto P = [=](double s) { return a0 * s + a1 * (s / 2.0 - std::sin(2.0 * w * s) / (4.0 * w)); };
            return P(t) - P(t0);
        };
        ac = stieltjes::AcPart::from_density(dens);
        d.kind = "density";
        break;
    }
    case 1: { // closed-form primitive a0 t + a1 t^3
        auto prim = [=](double t) { return a0 * t + a1 * t * t * t; };
        d.Gc = prim;
        ac = stieltjes::AcPart::from_primitive(prim, [=](double t) { return a0 + 3.0 * a1 * t * t; });
        d.kind = "primitive";
        break;
    }
    case 2:
        d.Gc = [](double t) { return t; };
        ac = stieltjes::AcPart::identity();
        d.kind = "identity";
        break;
    default: { // sin+ with kinks at integers (primitive without density)
        auto prim = [](double t) {
            const double k = std::floor(t / 2.0);
            const double s = t - 2.0 * k;
            const double pi = std::numbers::pi;
            return k * 2.0 / pi + (s <= 1.0 ? (1.0 - std::cos(pi * s)) / pi : 2.0 / pi);
        };
        d.Gc = [=](double t) { return prim(t) - prim(t0); };
        for (double k = std::ceil(dom.t0); k <= dom.t1; k += 1.0) d.kinks.push_back(k);
        ac = stieltjes::AcPart::from_primitive(d.Gc, {}, d.kinks);
        d.kind = "sinplus";
        break;
    }
    }
    const std::size_t nj = static_cast<std::size_t>(U(rng) * static_cast<double>(max_jumps + 1));
    std::vector<stieltjes::Jump> js;
    for (std::size_t k = 0; k < nj; ++k) {
        // round to a 1/64 lattice so jump times are exact binary fractions
        const double t = std::round((dom.t0 + U(rng) * dom.length()) * 64.0) / 64.0;
        if (t <= dom.t0 || t >= dom.t1) continue;
        bool dup = false;
        for (const auto& j : js) dup = dup || j.time == t;
        if (dup) continue;
        js.push_back({t, 0.1 + 2.0 * U(rng)});
    }
    std::sort(js.begin(), js.end(), [](const auto& x, const auto& y) { return x.time < y.time; });
    for (const auto& j : js) d.jumps.push_back({j.time, j.size});
    d.g = stieltjes::Integrator(dom, std::move(ac), js);
    return d;
}

inline RandomIntegrand random_integrand(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    const double c0 = U(rng), c1 = U(rng), c2 = U(rng), c3 = U(rng);
    const double A = U(rng), w = 1.0 + 3.0 * std::fabs(U(rng)), ph = U(rng);
    if (U(rng) < 0.0) {
        auto f = [=](double t) { return c0 + t * (c1 + t * (c2 + t * c3)); };
        return {f, "poly"};
    }
    auto f = [=](double t) { return c0 + A * std::sin(w * t + ph) + c1 * t * std::cos(w * t); };
    return {f, "trig"};
}

} // namespace oracle

#endif // STIELTJES_TESTS_SUPPORT_HPP
