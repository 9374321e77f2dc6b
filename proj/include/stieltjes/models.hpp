#ifndef STIELTJES_MODELS_HPP
#define STIELTJES_MODELS_HPP

#include "stieltjes/expr.hpp"
#include "stieltjes/extremal.hpp"
#include "stieltjes/field.hpp"
#include "stieltjes/integrator.hpp"
#include "stieltjes/regulated.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace stieltjes {

/// Carrying capacity N(w).
struct CarryingCapacity {
    enum class Kind { floor, linear, expr };
    Kind kind = Kind::floor;
    double slope = 1.0;
    /// Expression in the variable w (kind expr).
    std::optional<Expr> expr;

    double operator()(double w) const;
    std::string name() const;
};

struct BacteriaParams {
    double L = 10.0;
    double c = 3.141592653589793;
    double a = 1.0 / 7.0;
    double r = 1.0;
    double p0 = 5.0;
    double T = 14.0;
    CarryingCapacity N;
};

/// Throws InvalidParams unless L, c, r, p0, T > 0 and N is nondecreasing on
/// samples of [-1, 2L + 1].
void validate(const BacteriaParams& p);

/// Continuous part of the driver: k * 2/pi + (s <= 1 ? (1 - cos(pi s))/pi : 2/pi),
/// k = floor(t/2), s = t - 2k.
double bacteria_Gc(double t);
/// max(sin(pi t), 0).
double bacteria_density(double t);
/// Driver with unit jumps at 2, 4, ... <= T and kinks at the integers.
Integrator bacteria_g(double T);

enum class LowerOption { zero, evaporation };

struct BacteriaProblem {
    Field field;
    VectorIntegrator vg;
    std::vector<double> y0;
    Bracket bracket;
    Interval window;
};

/// System (p, w) driven by (identity, g). Component 1 is r p (N(w) - p);
/// component 2 is -c with jump branch min(floor(a p) w, 2L - w). With N = floor
/// the field declares floor(w) as a level function.
/// Bracket: alpha = (0, 0) (zero) or (0, -c Gc(t)) (evaporation);
/// beta = (p0 exp(int_0^t r N(W)), W) with W refilled from beta_1(2k).
/// Bracket grids live on solver_mesh(vg, [0, T], mesh).
BacteriaProblem bacteria_build(const BacteriaParams& params, LowerOption lower = LowerOption::zero,
                               std::size_t mesh = 1400);

/// Closed-form W(t). `anchors[k-1]` is the population value read at the
/// refill time 2k (k >= 1). Throws MissingAnchors when t > 2 needs more.
double bacteria_W(const BacteriaParams& params, double t, std::span<const double> anchors);

struct FloorSegment {
    double t = 0.0;
    double N = 0.0;
};

/// Segment-wise logistic solution of p' = r p (N_i - p) on (t_i, t_{i+1}],
/// anchors propagated from p(t_0) = p0. N_i = 0 uses p_i / (1 + r p_i (t - t_i)).
/// Throws SegmentNotFound when t is outside [t_0, T].
double bacteria_p_closed_form(const BacteriaParams& params, std::span<const FloorSegment> segments, double t);

/// Times where floor(w) changes: bisection to 1e-10 inside cells plus nodes
/// whose jump crosses a level.
std::vector<double> bacteria_level_crossings(const BacteriaParams& params, const RegulatedGrid& w);

/// Segments (t_i, floor(w) on the segment) from the crossings of a w grid.
std::vector<FloorSegment> bacteria_floor_segments(const BacteriaParams& params, const RegulatedGrid& w);

/// Functional variant: the refill at t = 2n reads
/// min(floor(a * int_{2n-2}^{2n} gamma_1) w, 2L - w), integral by the trapezoid
/// rule on the frozen grid. Throws InvalidParams for a < 0.
FunctionalField bacteria_functional_build(const BacteriaParams& params);

/// Bracket for the functional variant: beta's W is refilled from the day
/// integrals of beta_1.
Bracket bacteria_functional_bracket(const BacteriaParams& params, LowerOption lower = LowerOption::zero,
                                    std::size_t mesh = 1400);

} // namespace stieltjes

#endif // STIELTJES_MODELS_HPP
