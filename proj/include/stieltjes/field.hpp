#ifndef STIELTJES_FIELD_HPP
#define STIELTJES_FIELD_HPP

#include "stieltjes/expr.hpp"
#include "stieltjes/ksint.hpp"
#include "stieltjes/regulated.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace stieltjes {

/// Right-hand side f = (f_1, ..., f_n) of y = y0 + int f(s, y(s)) dg(s).
///
/// Each component has a regular evaluator and an optional jump branch used in
/// place of the regular one when its driver jumps (a state-dependent refill
/// rule, for instance). The Side argument tells evaluators that depend on
/// time-indexed data (bracket bounds, frozen trajectories) which one-sided
/// value to read at t.
///
/// Level functions are piecewise constant functions of (t, y) whose changes
/// the solver locates and brackets with grid nodes.
class Field {
public:
    using Regular = std::function<double(double t, std::span<const double> y, Side side)>;
    using JumpBranch = std::function<double(double t, std::span<const double> y)>;
    using Level = std::function<double(double t, std::span<const double> y)>;

    struct Component {
        Regular regular;
        JumpBranch jump;
    };

    Field() = default;
    explicit Field(std::vector<Component> components, std::vector<Level> levels = {});

    /// Components written in the expression language over the variables
    /// t, y1..yn and the named parameters. `jumps[i]` may be empty.
    static Field from_exprs(std::span<const Expr> regular, std::span<const std::optional<Expr>> jumps,
                            const Env& params, std::span<const Expr> levels = {});

    std::size_t dim() const noexcept { return components_.size(); }
    bool has_jump_branch(std::size_t i) const { return static_cast<bool>(components_[i].jump); }

    /// f_i(t, y). Evaluation failures are rethrown as FieldEvaluationError.
    double eval(std::size_t i, double t, std::span<const double> y, Side side = Side::value) const;
    /// Jump branch of f_i if present, the regular branch otherwise.
    double eval_jump(std::size_t i, double t, std::span<const double> y) const;

    std::span<const Level> levels() const noexcept { return levels_; }
    Field with_levels(std::vector<Level> levels) const;

    const Component& component(std::size_t i) const { return components_[i]; }

private:
    std::vector<Component> components_;
    std::vector<Level> levels_;
};

/// Slot layout used by expression fields: t, y1..yn, then parameters in
/// name order.
std::vector<std::string> field_slots(std::size_t n, const Env& params);

/// s -> f_i(s, y(s)) along a grid trajectory; the jump value uses the jump
/// branch at the pre-jump state. Breakpoints are the trajectory nodes.
Integrand field_along(const Field& f, std::size_t i, std::span<const RegulatedGrid> y);

/// Evaluates every grid at (t, side) into `out`.
void trajectory_at(std::span<const RegulatedGrid> y, double t, Side side, std::span<double> out);

} // namespace stieltjes

#endif // STIELTJES_FIELD_HPP
