#include "stieltjes/field.hpp"

#include "stieltjes/error.hpp"

#include <algorithm>
#include <memory>

namespace stieltjes {

namespace {

// Compiled component sharing one slot layout. The evaluation frame is built on
// the stack for typical sizes so concurrent evaluation needs no locking.
struct ExprKernel {
    CompiledExpr code;
    std::vector<double> params;
    std::size_t n;

    double operator()(double t, std::span<const double> y) const
    {
        constexpr std::size_t kInline = 48;
        const std::size_t total = 1 + n + params.size();
        auto fill = [&](double* frame) {
            frame[0] = t;
            std::copy(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n), frame + 1);
            std::copy(params.begin(), params.end(), frame + 1 + n);
        };
        if (total <= kInline) {
            std::array<double, kInline> frame;
            fill(frame.data());
            return code(std::span<const double>(frame.data(), total));
        }
        std::vector<double> frame(total);
        fill(frame.data());
        return code(frame);
    }
};

} // namespace

std::vector<std::string> field_slots(std::size_t n, const Env& params)
{
    std::vector<std::string> slots{"t"};
    for (std::size_t i = 0; i < n; ++i) slots.push_back("y" + std::to_string(i + 1));
    for (const auto& [name, value] : params) slots.push_back(name);
    return slots;
}

Field::Field(std::vector<Component> components, std::vector<Level> levels)
    : components_(std::move(components))
    , levels_(std::move(levels))
{
    for (const auto& c : components_) {
        if (!c.regular) throw InvalidParams("field component without a regular evaluator");
    }
}

Field Field::from_exprs(std::span<const Expr> regular, std::span<const std::optional<Expr>> jumps,
                        const Env& params, std::span<const Expr> levels)
{
    const std::size_t n = regular.size();
    if (!jumps.empty() && jumps.size() != n) throw InvalidParams("jump branch list must match the dimension");
    const auto slots = field_slots(n, params);
    std::vector<double> values;
    for (const auto& [name, value] : params) values.push_back(value);

    std::vector<Component> comps;
    comps.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto kernel = std::make_shared<const ExprKernel>(ExprKernel{CompiledExpr(regular[i], slots), values, n});
        Component c;
        c.regular = [kernel](double t, std::span<const double> y, Side) { return (*kernel)(t, y); };
        if (!jumps.empty() && jumps[i]) {
            auto jk = std::make_shared<const ExprKernel>(ExprKernel{CompiledExpr(*jumps[i], slots), values, n});
            c.jump = [jk](double t, std::span<const double> y) { return (*jk)(t, y); };
        }
        comps.push_back(std::move(c));
    }
    std::vector<Level> lv;
    for (const auto& e : levels) {
        auto lk = std::make_shared<const ExprKernel>(ExprKernel{CompiledExpr(e, slots), values, n});
        lv.push_back([lk](double t, std::span<const double> y) { return (*lk)(t, y); });
    }
    return Field(std::move(comps), std::move(lv));
}

double Field::eval(std::size_t i, double t, std::span<const double> y, Side side) const
{
    try {
        return components_[i].regular(t, y, side);
    } catch (const FieldEvaluationError&) {
        throw;
    } catch (const std::exception& e) {
        throw FieldEvaluationError(t, i, e.what());
    }
}

double Field::eval_jump(std::size_t i, double t, std::span<const double> y) const
{
    if (!components_[i].jump) return eval(i, t, y, Side::value);
    try {
        return components_[i].jump(t, y);
    } catch (const FieldEvaluationError&) {
        throw;
    } catch (const std::exception& e) {
        throw FieldEvaluationError(t, i, e.what());
    }
}

Field Field::with_levels(std::vector<Level> levels) const
{
    Field copy = *this;
    copy.levels_ = std::move(levels);
    return copy;
}

void trajectory_at(std::span<const RegulatedGrid> y, double t, Side side, std::span<double> out)
{
    for (std::size_t k = 0; k < y.size(); ++k) out[k] = y[k].eval(t, side);
}

Integrand field_along(const Field& f, std::size_t i, std::span<const RegulatedGrid> y)
{
    auto traj = std::make_shared<const std::vector<RegulatedGrid>>(y.begin(), y.end());
    auto field = std::make_shared<const Field>(f);
    std::vector<double> breakpoints = merge_nodes(y);
    auto regular = [traj, field, i](double t, Side side) {
        std::array<double, 16> inline_state;
        std::vector<double> heap;
        std::span<double> state;
        if (traj->size() <= inline_state.size()) {
            state = std::span<double>(inline_state.data(), traj->size());
        } else {
            heap.resize(traj->size());
            state = heap;
        }
        trajectory_at(*traj, t, side, state);
        return field->eval(i, t, state, side);
    };
    auto at_jump = [traj, field, i](double t) {
        std::vector<double> state(traj->size());
        trajectory_at(*traj, t, Side::value, state);
        return field->eval_jump(i, t, state);
    };
    return Integrand(std::move(regular), std::move(at_jump), std::move(breakpoints));
}

} // namespace stieltjes
