#include "stieltjes/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace stieltjes {

namespace {

// delta below this is rounding noise of the panel sums
double roundoff(double a, double b, double f0, double f1, double f2)
{
    constexpr double eps = std::numeric_limits<double>::epsilon();
    return 64.0 * eps * (b - a) * std::max({std::fabs(f0), std::fabs(f1), std::fabs(f2)});
}

struct SimpsonState {
    const SidedFunction& f;
    const QuadratureOptions& opts;
    double global_tol;
    QuadratureResult result;

    double eval(double t)
    {
        ++result.evaluations;
        return f(t, Side::value);
    }

    double recurse(double a, double b, double fa, double fm, double fb, double whole, double tol, int depth)
    {
        const double m = 0.5 * (a + b);
        const double lm = 0.5 * (a + m);
        const double rm = 0.5 * (m + b);
        const double flm = eval(lm);
        const double frm = eval(rm);
        const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        const double sum = left + right;
        const double delta = sum - whole;
        const double accept = std::max({tol, opts.rel_tol * std::fabs(sum), roundoff(a, b, fa, fm, fb)});

        if (depth >= opts.min_depth && std::fabs(delta) <= 15.0 * accept) {
            result.error_estimate += std::fabs(delta) / 15.0;
            return sum + delta / 15.0;
        }
        if (depth >= opts.max_depth || !(m > a && m < b)) {
            const double global_accept = std::max(global_tol, opts.rel_tol * std::fabs(sum));
            if (std::fabs(delta) > 15.0 * global_accept) result.tolerance_met = false;
            result.error_estimate += std::fabs(delta) / 15.0;
            return sum + delta / 15.0;
        }
        return recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)
               + recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
    }
};

struct TrapezoidState {
    const SidedFunction& f;
    const std::function<double(double)>& G;
    const QuadratureOptions& opts;
    double global_tol;
    QuadratureResult result;

    double recurse(double a, double b, double fa, double fb, double Ga, double Gb, double whole, double tol,
                   int depth)
    {
        const double m = 0.5 * (a + b);
        const double fm = f(m, Side::value);
        const double Gm = G(m);
        result.evaluations += 1;
        const double left = 0.5 * (fa + fm) * (Gm - Ga);
        const double right = 0.5 * (fm + fb) * (Gb - Gm);
        const double sum = left + right;
        const double delta = sum - whole;
        const double accept = std::max({tol, opts.rel_tol * std::fabs(sum), roundoff(a, b, fa, fm, fb)});

        if (depth >= opts.min_depth && std::fabs(delta) <= 3.0 * accept) {
            result.error_estimate += std::fabs(delta) / 3.0;
            return sum + delta / 3.0;
        }
        if (depth >= opts.max_depth || !(m > a && m < b)) {
            const double global_accept = std::max(global_tol, opts.rel_tol * std::fabs(sum));
            if (std::fabs(delta) > 3.0 * global_accept) result.tolerance_met = false;
            result.error_estimate += std::fabs(delta) / 3.0;
            return sum + delta / 3.0;
        }
        return recurse(a, m, fa, fm, Ga, Gm, left, 0.5 * tol, depth + 1)
               + recurse(m, b, fm, fb, Gm, Gb, right, 0.5 * tol, depth + 1);
    }
};

} // namespace

QuadratureResult adaptive_simpson(const SidedFunction& f, double a, double b, const QuadratureOptions& opts)
{
    SimpsonState st{f, opts, opts.abs_tol, {}};
    if (!(b > a)) return st.result;
    const double fa = f(a, Side::post);
    const double fb = f(b, Side::value);
    const double fm = f(0.5 * (a + b), Side::value);
    st.result.evaluations = 3;
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    st.result.value = st.recurse(a, b, fa, fm, fb, whole, opts.abs_tol, 1);
    return st.result;
}

QuadratureResult adaptive_stieltjes_trapezoid(const SidedFunction& f, const std::function<double(double)>& G,
                                              double a, double b, const QuadratureOptions& opts)
{
    TrapezoidState st{f, G, opts, opts.abs_tol, {}};
    if (!(b > a)) return st.result;
    const double fa = f(a, Side::post);
    const double fb = f(b, Side::value);
    const double Ga = G(a);
    const double Gb = G(b);
    st.result.evaluations = 2;
    const double whole = 0.5 * (fa + fb) * (Gb - Ga);
    st.result.value = st.recurse(a, b, fa, fb, Ga, Gb, whole, opts.abs_tol, 1);
    return st.result;
}

} // namespace stieltjes
