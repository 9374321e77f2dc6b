#ifndef STIELTJES_QUADRATURE_HPP
#define STIELTJES_QUADRATURE_HPP

#include "stieltjes/regulated.hpp"

#include <cstddef>
#include <functional>

namespace stieltjes {

struct QuadratureOptions {
    double abs_tol = 1e-9;
    /// Accept a panel when its error estimate is below rel_tol * |panel value|
    /// even if abs_tol is not met. Zero disables.
    double rel_tol = 0.0;
    int max_depth = 30;
    int min_depth = 2;
    /// false: integrals that miss the tolerance return their value and error
    /// estimate instead of throwing ToleranceNotMet.
    bool strict = true;
};

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    bool tolerance_met = true;
    std::size_t evaluations = 0;
};

/// Integrand read with one-sided semantics at panel ends: the left end of
/// [a, b] is evaluated with Side::post, the right end with Side::value, and
/// interior points with Side::value.
using SidedFunction = std::function<double(double, Side)>;

/// Adaptive Simpson on [a, b] with deterministic subdivision order and
/// Richardson correction. tolerance_met is false only when a panel at
/// max_depth still has an error estimate above the global tolerance.
QuadratureResult adaptive_simpson(const SidedFunction& f, double a, double b, const QuadratureOptions& opts);

/// Adaptive trapezoid for the Riemann-Stieltjes integral of f against a
/// continuous nondecreasing primitive G (no density needed).
QuadratureResult adaptive_stieltjes_trapezoid(const SidedFunction& f, const std::function<double(double)>& G,
                                              double a, double b, const QuadratureOptions& opts);

} // namespace stieltjes

#endif // STIELTJES_QUADRATURE_HPP
