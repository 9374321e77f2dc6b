#ifndef STIELTJES_REGULATED_HPP
#define STIELTJES_REGULATED_HPP

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace stieltjes {

/// Which one-sided quantity to read at a time point: the (left-continuous)
/// value or the right limit.
enum class Side { value, post };

/// Left-continuous regulated function on [t_0, t_m] stored on a grid.
///
/// At every node t_j the grid keeps the value f(t_j) = f(t_j-) and the jump
/// f(t_j+) - f(t_j); the right limit is value + jump. Inside an open cell
/// (t_j, t_{j+1}) the function is the linear interpolation from the right limit
/// at t_j to the value at t_{j+1}, unless an interior sampler is attached, in
/// which case the sampler is used there. At the last node the jump is zero.
class RegulatedGrid {
public:
    using Sampler = std::function<double(double)>;

    RegulatedGrid() = default;

    static RegulatedGrid from_posts(std::vector<double> nodes, std::vector<double> values,
                                    std::vector<double> posts, Sampler interior = {});
    static RegulatedGrid from_jumps(std::vector<double> nodes, std::vector<double> values,
                                    std::vector<double> jumps, Sampler interior = {});
    /// Grid without jumps.
    static RegulatedGrid continuous(std::vector<double> nodes, std::vector<double> values,
                                    Sampler interior = {});
    /// Samples a continuous function on `nodes` and keeps it as interior sampler.
    static RegulatedGrid sample(const std::function<double(double)>& fn, std::vector<double> nodes,
                                bool keep_sampler = true);
    static RegulatedGrid constant(double c, std::vector<double> nodes);

    std::span<const double> nodes() const noexcept { return nodes_; }
    std::span<const double> values() const noexcept { return values_; }
    std::span<const double> posts() const noexcept { return posts_; }
    std::span<const double> jumps() const noexcept { return jumps_; }
    std::size_t size() const noexcept { return nodes_.size(); }
    double t0() const { return nodes_.front(); }
    double t1() const { return nodes_.back(); }
    bool has_sampler() const noexcept { return static_cast<bool>(interior_); }
    const Sampler& sampler() const noexcept { return interior_; }

    bool contains(double t) const noexcept { return !nodes_.empty() && t >= t0() && t <= t1(); }

    /// Index of the node equal to t, if any.
    std::optional<std::size_t> node_index(double t) const;

    /// Left-continuous value f(t). Throws OutOfDomain.
    double operator()(double t) const;
    /// Right limit f(t+); equals f(t1) at the right end.
    double right_limit(double t) const;
    /// Left limit f(t-); equals f(t0) at the left end.
    double left_limit(double t) const;
    double eval(double t, Side side) const { return side == Side::value ? (*this)(t) : right_limit(t); }

    /// Copy with the interior sampler dropped (pure piecewise-linear view).
    RegulatedGrid without_sampler() const;

private:
    void validate() const;
    double interior(std::size_t cell, double t) const;

    std::vector<double> nodes_;
    std::vector<double> values_;
    std::vector<double> posts_;
    std::vector<double> jumps_;
    Sampler interior_;
};

/// f(t+) - f(t); zero away from nodes.
double delta_plus(const RegulatedGrid& f, double t);

/// f(t) - f(t-); zero for every grid by construction (left continuity).
double delta_minus(const RegulatedGrid& f, double t);

/// Division a = s_0 < ... < s_k = b such that on every open cell the
/// oscillation of f, measured over the stored samples (right limit at the
/// cell start, values and right limits of interior nodes, value at the cell
/// end), is below eps. Grid cells whose own oscillation reaches eps are split
/// uniformly; the linear interior makes the split exact.
std::vector<double> eps_division(const RegulatedGrid& f, double eps);

/// Oscillation of f over the open cell (a, b) measured on stored samples.
double sample_oscillation(const RegulatedGrid& f, double a, double b);

/// Pointwise maximum. Nodes are the union of the input nodes plus the points
/// where linear pieces cross, so the result is exact on the representation.
/// Throws DomainMismatch when domains differ.
RegulatedGrid pointwise_sup(std::span<const RegulatedGrid> fs);

/// Pointwise minimum (mirror of pointwise_sup).
RegulatedGrid pointwise_inf(std::span<const RegulatedGrid> fs);

/// Compares two grids as functions at the union of their nodes and cell
/// midpoints, values and right limits, with absolute tolerance.
bool approx_equal(const RegulatedGrid& a, const RegulatedGrid& b, double tol = 1e-12);

/// Sorted union of node sets.
std::vector<double> merge_nodes(std::span<const RegulatedGrid> fs);

/// Writes the header "t,value,post" and one row per node.
void write_csv(std::ostream& os, const RegulatedGrid& f);
RegulatedGrid read_csv(std::istream& is);

/// Shortest decimal representation that round-trips to the same double.
std::string format_number(double x);

} // namespace stieltjes

#endif // STIELTJES_REGULATED_HPP
