#ifndef STIELTJES_EXTREMAL_HPP
#define STIELTJES_EXTREMAL_HPP

#include "stieltjes/field.hpp"
#include "stieltjes/integrator.hpp"
#include "stieltjes/ksint.hpp"
#include "stieltjes/regulated.hpp"
#include "stieltjes/solver.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace stieltjes {

/// Functional interval [alpha, beta]; one grid per component.
struct Bracket {
    std::vector<RegulatedGrid> alpha;
    std::vector<RegulatedGrid> beta;

    std::size_t dim() const noexcept { return alpha.size(); }
};

/// Throws InvalidGrid unless alpha <= beta + tol at every node (value and post).
void validate_bracket(const Bracket& b, double tol = 1e-12);

/// Grid alpha + theta_i (beta - alpha) on the merged bracket nodes.
std::vector<RegulatedGrid> bracket_interpolant(const Bracket& b, std::span<const double> theta);

struct VerifyReport {
    bool passed = true;
    /// Largest signed violation (positive = inequality broken by that much).
    double worst_violation = 0.0;
    double t = 0.0;
    double t_end = 0.0;
    std::size_t component = 0;
    std::string check;
    std::size_t samples_checked = 0;
    double tolerance = 0.0;
};

/// Lower: alpha(t0) <= y0, alpha_i(v) - alpha_i(u) <= int_u^v f_i(s, alpha(s)) dg_i on
/// adjacent nodes, and Delta^+ alpha_i(t) <= f_i(t, alpha(t)) Delta^+ g_i(t) at every node.
/// Throws MeshMissingJump.
VerifyReport verify_lower(std::span<const RegulatedGrid> cand, const Field& f, const VectorIntegrator& vg,
                          std::span<const double> y0, double tol = 1e-8);
/// Mirror of verify_lower.
VerifyReport verify_upper(std::span<const RegulatedGrid> cand, const Field& f, const VectorIntegrator& vg,
                          std::span<const double> y0, double tol = 1e-8);

/// Samples times and pairs x <= y in the bracket with x_i = y_i and checks
/// f_i(t, x) <= f_i(t, y) + tol; event times of `vg` also check the jump branch.
/// Work is split into fixed seeded shards; STIELTJES_SIM_THREADS caps threads.
VerifyReport check_quasimonotone(const Field& f, const Bracket& bracket, std::size_t samples, std::uint64_t seed,
                                 double tol = 1e-8, const VectorIntegrator* vg = nullptr);

/// At every event tau of g_i checks that u -> u + f_i^jump(tau, eta + (u - eta_i) e_i) Delta^+ g_i(tau)
/// is nondecreasing on a u-grid over [alpha_i(tau), beta_i(tau)], for eta = alpha, beta and
/// `eta_samples` random points of the bracket.
VerifyReport check_jump_monotone(const Field& f, const VectorIntegrator& vg, const Bracket& bracket,
                                 std::size_t u_samples, std::size_t eta_samples = 8, std::uint64_t seed = 1,
                                 double tol = 1e-8);

/// Per-component nonnegative bound M_i.
struct DominatingBound {
    std::vector<Integrand> M;
};

/// For sampled eta in the bracket and adjacent nodes checks
/// |int_u^v f_i(s, eta(s)) dg_i| <= int_u^v M_i dg_i + tol.
VerifyReport check_domination(const Field& f, const VectorIntegrator& vg, const Bracket& bracket,
                              const DominatingBound& M, double tol = 1e-8, std::size_t eta_samples = 4,
                              std::uint64_t seed = 1);

/// f~(t, x) = f(t, clamp(x, alpha(t), beta(t))), bounds read on the requested side.
/// Level functions are composed with the same clamp.
Field truncate_field(const Field& f, const Bracket& bracket);

enum class Direction { greatest, least };
enum class IterationStatus { converged, max_iter_exceeded, bracket_violation };

std::string to_string(Direction d);
std::string to_string(IterationStatus s);

struct ExtremalOptions {
    Direction direction = Direction::greatest;
    std::size_t mesh = 1000;
    double tol = 1e-6;
    std::size_t max_iter = 200;
    /// Cells per Picard window; 0 iterates over the whole window at once.
    std::size_t window_cells = 0;
    double quad_tol = 1e-11;
    bool compute_residual = true;
};

struct ExtremalReport {
    SolveReport result;
    IterationStatus status = IterationStatus::converged;
    std::size_t iterations = 0;
    /// sup-node change of every iteration, windows concatenated.
    std::vector<double> changes;
    bool monotone = true;
    /// Largest distance by which an unclamped final iterate left the bracket.
    double bracket_escape = 0.0;
};

/// Picard iteration y^{k+1} = y0 + int f~(s, y^k(s)) dg, started from beta
/// (greatest) or alpha (least) and clamped into the bracket after every step.
/// Stops when the sup-node change drops below tol.
ExtremalReport extremal_solve(const Field& f, const VectorIntegrator& vg, std::span<const double> y0,
                              const Bracket& bracket, Interval window, const ExtremalOptions& opts = {});

/// Field depending on a frozen whole trajectory gamma.
using FunctionalField = std::function<Field(std::span<const RegulatedGrid> gamma)>;

enum class OuterStatus { converged, outer_max_exceeded };
std::string to_string(OuterStatus s);

struct FunctionalOptions {
    ExtremalOptions inner;
    double outer_tol = 1e-6;
    std::size_t outer_max = 50;
    std::size_t h5_pairs = 8;
    std::size_t h5_points = 64;
    std::uint64_t seed = 1;
    double h5_tol = 1e-8;
};

struct FunctionalReport {
    ExtremalReport inner;
    OuterStatus status = OuterStatus::converged;
    std::size_t outer_iterations = 0;
    std::vector<double> outer_changes;
    /// false when ordered outer iterates came out unordered beyond tol.
    bool monotone = true;
    VerifyReport h5;
    /// residual of the final trajectory against the field frozen at itself.
    double residual = 0.0;
};

/// Spot check: for ordered gamma_a <= gamma_b in the bracket,
/// f(t, x; gamma_a) <= f(t, x; gamma_b) + tol at sampled (t, x), jump branches at events.
VerifyReport check_functional_monotone(const FunctionalField& F, const VectorIntegrator& vg, const Bracket& bracket,
                                       std::size_t pairs, std::size_t points, std::uint64_t seed, double tol);

/// gamma^{m+1} = extremal solution of the problem frozen at gamma^m.
FunctionalReport functional_extremal(const FunctionalField& F, const VectorIntegrator& vg, std::span<const double> y0,
                                     const Bracket& bracket, Interval window, const FunctionalOptions& opts = {});

/// Mean of a grid over its domain by the trapezoid rule on nodes (posts used
/// on the right of each node).
double grid_mean(const RegulatedGrid& y);

/// Trapezoid integral of y over [u, v] on its nodes, u and v interpolated.
double grid_trapezoid(const RegulatedGrid& y, double u, double v);

/// Number of worker threads: STIELTJES_SIM_THREADS if set and positive,
/// hardware concurrency otherwise.
std::size_t sim_threads();

} // namespace stieltjes

#endif // STIELTJES_EXTREMAL_HPP
