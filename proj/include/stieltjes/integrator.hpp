#ifndef STIELTJES_INTEGRATOR_HPP
#define STIELTJES_INTEGRATOR_HPP

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace stieltjes {

struct Interval {
    double t0 = 0.0;
    double t1 = 0.0;

    bool contains(double t) const noexcept { return t >= t0 && t <= t1; }
    double length() const noexcept { return t1 - t0; }
    friend bool operator==(const Interval&, const Interval&) = default;
};

struct Jump {
    double time = 0.0;
    double size = 0.0;
};

/// Continuous part G_c of a driver.
class AcPart {
public:
    enum class Kind { none, identity, density, primitive };

    using Fn = std::function<double(double)>;

    static AcPart none();
    static AcPart identity();
    /// G_c(t) = integral of d from the domain start to t, d >= 0.
    static AcPart from_density(Fn density, std::vector<double> kinks = {});
    /// Closed-form nondecreasing continuous G_c; `density` may be supplied
    /// when known (needed by the rk4_density scheme).
    static AcPart from_primitive(Fn primitive, Fn density = {}, std::vector<double> kinks = {});

    Kind kind() const noexcept { return kind_; }
    bool has_density() const noexcept { return kind_ != Kind::primitive || static_cast<bool>(density_); }
    const Fn& primitive_fn() const noexcept { return primitive_; }
    const Fn& density_fn() const noexcept { return density_; }
    std::span<const double> kinks() const noexcept { return kinks_; }

private:
    Kind kind_ = Kind::none;
    Fn primitive_;
    Fn density_;
    std::vector<double> kinks_;
};

struct GValue {
    double value;
    double right_limit;
};

/// Nondecreasing left-continuous driver g(t) = G_c(t) + sum_{tau_k < t} size_k
/// on a closed interval. Validated at construction: positive jump sizes,
/// strictly increasing jump times inside the domain, and monotone G_c on 1024
/// uniform samples plus the jump times.
class Integrator {
public:
    Integrator(Interval domain, AcPart ac, std::vector<Jump> jumps = {});

    const Interval& domain() const noexcept { return domain_; }
    const AcPart& ac() const noexcept { return ac_; }
    std::span<const Jump> jumps() const noexcept { return jumps_; }
    std::span<const double> kinks() const noexcept { return ac_.kinks(); }

    /// G_c(t). For density kind this is the integral from the domain start.
    double continuous(double t) const;
    /// G_c(v) - G_c(u), u <= v.
    double continuous_increment(double u, double v) const;
    bool has_density() const noexcept { return ac_.has_density(); }
    /// Density of G_c at t (0 for none, 1 for identity).
    double density(double t) const;

    /// g(t) and g(t+). Throws OutOfDomain.
    GValue eval(double t) const;
    double operator()(double t) const { return eval(t).value; }

    /// Delta^+ g(t): jump size at t, zero elsewhere.
    double jump_at(double t) const;

    /// Jump times in [u, v).
    std::vector<double> jump_times(double u, double v) const;
    /// Sum of jump sizes over [u, v).
    double jump_mass(double u, double v) const;

private:
    void validate() const;

    Interval domain_;
    AcPart ac_;
    std::vector<Jump> jumps_;
};

/// mu_g([u, v)) = g(v) - g(u). Throws OutOfDomain or ReversedInterval.
double measure_interval(const Integrator& g, double u, double v);

/// (g(t), g(t+)).
GValue g_eval(const Integrator& g, double t);

/// Drivers for each component; all share one domain.
class VectorIntegrator {
public:
    explicit VectorIntegrator(std::vector<Integrator> components);

    std::size_t size() const noexcept { return components_.size(); }
    const Integrator& operator[](std::size_t i) const { return components_[i]; }
    const Interval& domain() const { return components_.front().domain(); }
    std::span<const Integrator> components() const noexcept { return components_; }

private:
    std::vector<Integrator> components_;
};

/// Sorted union of the jump times of every component lying in [u, v).
std::vector<double> merged_events(const VectorIntegrator& vg, double u, double v);

/// Jumps produced by a periodic rule: start, start + period, ... up to `end`.
std::vector<Jump> periodic_jumps(double start, double period, double size, double end);

} // namespace stieltjes

#endif // STIELTJES_INTEGRATOR_HPP
