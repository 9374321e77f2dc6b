#ifndef STIELTJES_KSINT_HPP
#define STIELTJES_KSINT_HPP

#include "stieltjes/expr.hpp"
#include "stieltjes/integrator.hpp"
#include "stieltjes/quadrature.hpp"
#include "stieltjes/regulated.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace stieltjes {

/// Function of time integrated against a driver.
///
/// `regular` is sampled by quadrature on open cells (with one-sided reads at
/// cell ends); `at_jump` gives the value multiplying a jump of the driver.
/// They differ only for fields with a separate jump branch. `breakpoints`
/// lists times where the integrand may be non-smooth; quadrature splits there.
class Integrand {
public:
    using Regular = std::function<double(double, Side)>;
    using AtJump = std::function<double(double)>;

    Integrand(Regular regular, AtJump at_jump = {}, std::vector<double> breakpoints = {});

    static Integrand from_function(std::function<double(double)> fn, std::vector<double> breakpoints = {});
    static Integrand from_expr(const Expr& e, const Env& params = {});
    static Integrand from_grid(RegulatedGrid grid);

    double operator()(double t, Side side = Side::value) const { return regular_(t, side); }
    double at_jump(double t) const { return at_jump_ ? at_jump_(t) : regular_(t, Side::value); }
    std::span<const double> breakpoints() const noexcept { return breakpoints_; }

private:
    Regular regular_;
    AtJump at_jump_;
    std::vector<double> breakpoints_;
};

/// Integral of f against the continuous part of g over [u, v]; jumps excluded.
/// Splits at kinks, jump times and integrand breakpoints. Uses Simpson on
/// f * density when a density exists, a Stieltjes trapezoid otherwise.
/// Throws ToleranceNotMet.
double continuous_integral(const Integrand& f, const Integrator& g, double u, double v,
                           const QuadratureOptions& opts);

/// Kurzweil-Stieltjes integral over [u, v]: continuous part plus
/// f(tau) * Delta^+ g(tau) for jumps tau in [u, v). A jump at v is excluded.
double ks_integrate(const Integrand& f, const Integrator& g, double u, double v,
                    const QuadratureOptions& opts);
double ks_integrate(const Integrand& f, const Integrator& g, double u, double v, double tol = 1e-9);

struct KsEstimate {
    double value = 0.0;
    double error_estimate = 0.0;
    bool tolerance_met = true;
};
/// ks_integrate that never throws ToleranceNotMet.
KsEstimate ks_integrate_estimate(const Integrand& f, const Integrator& g, double u, double v,
                                 const QuadratureOptions& opts);

/// h(t) = integral from mesh.front() to t, on the given mesh. At every jump
/// time tau the stored jump is exactly the product f(tau) * Delta^+ g(tau).
/// Throws MeshMissingJump when a jump of g in [mesh.front(), mesh.back()) is
/// not a mesh node.
RegulatedGrid indefinite_integral(const Integrand& f, const Integrator& g, std::span<const double> mesh,
                                  const QuadratureOptions& opts);
RegulatedGrid indefinite_integral(const Integrand& f, const Integrator& g, std::span<const double> mesh,
                                  double tol = 1e-9);

enum class Approach { left, right };

struct HakeReport {
    bool passed = false;
    double integral = 0.0;
    std::vector<double> approach_points;
    std::vector<double> discrepancies;
    double final_discrepancy = 0.0;
};

/// Compares the integral over [u, v] with the Hake limits
///   right:  int_{t_k}^{v} f dg + f(u) (g(t_k) - g(u)),   t_k -> u+
///   left:   int_{u}^{t_k} f dg + f(v) (g(v) - g(t_k)),   t_k -> v-
/// along t_k at distance (v - u) 2^-k, k = 1..seq_len. Passes when the last
/// discrepancy is below 10 * tol.
HakeReport hake_check(const Integrand& f, const Integrator& g, double u, double v, Approach approach,
                      std::size_t seq_len, double tol = 1e-9);

} // namespace stieltjes

#endif // STIELTJES_KSINT_HPP
