#ifndef STIELTJES_SOLVER_HPP
#define STIELTJES_SOLVER_HPP

#include "stieltjes/field.hpp"
#include "stieltjes/integrator.hpp"
#include "stieltjes/quadrature.hpp"
#include "stieltjes/regulated.hpp"

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace stieltjes {

enum class Scheme { euler_g, rk4_density };

std::string to_string(Scheme s);
Scheme scheme_from_string(std::string_view name);

struct SolveOptions {
    Scheme scheme = Scheme::euler_g;
    std::size_t mesh = 1000;
    /// Compute residual_norm of the result (one quadrature per cell).
    bool compute_residual = true;
    double residual_tol = 1e-11;
    /// Width to which level-function changes are bracketed.
    double crossing_tol = 1e-10;
    /// Per base cell; beyond this the remaining cell is taken in one step.
    std::size_t max_substeps = 256;
};

struct EventRecord {
    double t = 0.0;
    std::size_t component = 0;
    double dg = 0.0;
    double dy = 0.0;
};

struct SolveReport {
    std::vector<RegulatedGrid> solution;
    Scheme scheme = Scheme::euler_g;
    std::size_t mesh = 0;
    double residual = 0.0;
    std::vector<EventRecord> events;
    /// Midpoints of the bracketed level changes.
    std::vector<double> crossings;
};

/// Uniform mesh on the window merged with events in [t0, t1) and kink hints;
/// uniform nodes within 1e-9 * length of such a time are dropped.
std::vector<double> solver_mesh(const VectorIntegrator& vg, Interval window, std::size_t mesh);

/// Solves y_i(t) = y0_i + int_{t0}^{t} f_i(s, y(s)) dg_i(s) on the window.
///
/// Nodes: uniform mesh, merged events, kink hints and located level changes.
/// At an event tau every component jumps at once from the pre-jump state:
/// y_i(tau+) = y_i(tau) + f_i^jump(tau, y(tau)) * Delta^+ g_i(tau).
/// Throws FieldEvaluationError, NonFiniteState, SchemeUnsupported.
SolveReport solve_mde(const Field& f, const VectorIntegrator& vg, std::span<const double> y0, Interval window,
                      const SolveOptions& opts = {});

/// g-derivative of y at an interior t. Exact jump ratio at jumps of g,
/// nullopt when g is locally constant at t, otherwise shrinking symmetric
/// quotients until two agree within rtol 1e-6. Throws NoConvergence.
std::optional<double> stieltjes_derivative(const RegulatedGrid& y, const Integrator& g, double t);

/// Non-strict options (abs_tol, rel_tol 1e-12) for internal checks where a
/// floor of the state may jump exactly at a cell end.
QuadratureOptions internal_quadrature(double abs_tol);

/// max over components and adjacent nodes of
/// |y_i(v) - y_i(u) - int_u^v f_i(s, y(s)) dg_i(s)|.
double residual_norm(const Field& f, const VectorIntegrator& vg, std::span<const RegulatedGrid> y,
                     const QuadratureOptions& opts);
double residual_norm(const Field& f, const VectorIntegrator& vg, std::span<const RegulatedGrid> y,
                     double tol = 1e-11);  // internal_quadrature(tol)

/// Columns t,value,post,g_value.
void write_solution_csv(std::ostream& os, const RegulatedGrid& y, const Integrator& g);
/// Columns t,i,dg,dy (i is 1-based).
/// Columns t, y1, y1_post, ..., yn, yn_post on the merged nodes.
void write_trajectory_csv(std::ostream& os, std::span<const RegulatedGrid> y);

void write_events_csv(std::ostream& os, std::span<const EventRecord> events);

} // namespace stieltjes

#endif // STIELTJES_SOLVER_HPP
