#include "stieltjes/integrator.hpp"

#include "stieltjes/error.hpp"
#include "stieltjes/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace stieltjes {

namespace {

constexpr int kValidationSamples = 1024;

QuadratureOptions density_quadrature()
{
    QuadratureOptions q;
    q.abs_tol = 1e-13;
    q.rel_tol = 1e-13;
    return q;
}

} // namespace

AcPart AcPart::none()
{
    AcPart p;
    p.kind_ = Kind::none;
    return p;
}

AcPart AcPart::identity()
{
    AcPart p;
    p.kind_ = Kind::identity;
    return p;
}

AcPart AcPart::from_density(Fn density, std::vector<double> kinks)
{
    AcPart p;
    p.kind_ = Kind::density;
    p.density_ = std::move(density);
    std::sort(kinks.begin(), kinks.end());
    p.kinks_ = std::move(kinks);
    return p;
}

AcPart AcPart::from_primitive(Fn primitive, Fn density, std::vector<double> kinks)
{
    AcPart p;
    p.kind_ = Kind::primitive;
    p.primitive_ = std::move(primitive);
    p.density_ = std::move(density);
    std::sort(kinks.begin(), kinks.end());
    p.kinks_ = std::move(kinks);
    return p;
}

Integrator::Integrator(Interval domain, AcPart ac, std::vector<Jump> jumps)
    : domain_(domain)
    , ac_(std::move(ac))
    , jumps_(std::move(jumps))
{
    validate();
}

void Integrator::validate() const
{
    if (!(domain_.t1 > domain_.t0) || !std::isfinite(domain_.t0) || !std::isfinite(domain_.t1))
        throw InvalidIntegrator("integrator domain must be a finite interval with t0 < t1");
    for (std::size_t k = 0; k < jumps_.size(); ++k) {
        const Jump& j = jumps_[k];
        if (!(j.size > 0.0) || !std::isfinite(j.size))
            throw InvalidIntegrator("jump sizes must be positive and finite (jump at t="
                                    + std::to_string(j.time) + ")");
        if (!domain_.contains(j.time))
            throw InvalidIntegrator("jump time " + std::to_string(j.time) + " outside the domain");
        if (k > 0 && !(j.time > jumps_[k - 1].time))
            throw InvalidIntegrator("jump times must be strictly increasing");
    }

    std::vector<double> samples;
    samples.reserve(kValidationSamples + jumps_.size());
    for (int k = 0; k < kValidationSamples; ++k)
        samples.push_back(domain_.t0 + domain_.length() * k / (kValidationSamples - 1));
    for (const Jump& j : jumps_) samples.push_back(j.time);
    std::sort(samples.begin(), samples.end());

    switch (ac_.kind()) {
    case AcPart::Kind::none:
    case AcPart::Kind::identity: break;
    case AcPart::Kind::density:
        if (!ac_.density_fn()) throw InvalidIntegrator("density kind requires a density function");
        for (double t : samples) {
            const double d = ac_.density_fn()(t);
            if (!(d >= 0.0) || !std::isfinite(d))
                throw InvalidIntegrator("density is negative or non-finite at t=" + std::to_string(t));
        }
        break;
    case AcPart::Kind::primitive: {
        if (!ac_.primitive_fn()) throw InvalidIntegrator("primitive kind requires a primitive function");
        double prev = ac_.primitive_fn()(samples.front());
        for (double t : samples) {
            const double G = ac_.primitive_fn()(t);
            if (!std::isfinite(G)) throw InvalidIntegrator("primitive is non-finite at t=" + std::to_string(t));
            if (G < prev - 1e-13 * (1.0 + std::fabs(prev)))
                throw InvalidIntegrator("primitive decreases near t=" + std::to_string(t));
            prev = G;
        }
        if (ac_.density_fn()) {
            for (double t : samples) {
                if (!(ac_.density_fn()(t) >= 0.0))
                    throw InvalidIntegrator("density is negative at t=" + std::to_string(t));
            }
        }
        break;
    }
    }
}

double Integrator::continuous(double t) const
{
    switch (ac_.kind()) {
    case AcPart::Kind::none: return 0.0;
    case AcPart::Kind::identity: return t;
    case AcPart::Kind::primitive: return ac_.primitive_fn()(t);
    case AcPart::Kind::density: return continuous_increment(domain_.t0, t);
    }
    return 0.0;
}

double Integrator::continuous_increment(double u, double v) const
{
    switch (ac_.kind()) {
    case AcPart::Kind::none: return 0.0;
    case AcPart::Kind::identity: return v - u;
    case AcPart::Kind::primitive: return ac_.primitive_fn()(v) - ac_.primitive_fn()(u);
    case AcPart::Kind::density: {
        if (!(v > u)) return 0.0;
        const auto& d = ac_.density_fn();
        const SidedFunction f = [&d](double s, Side) { return d(s); };
        const QuadratureOptions q = density_quadrature();
        double total = 0.0;
        double a = u;
        const auto kinks = ac_.kinks();
        for (auto it = std::upper_bound(kinks.begin(), kinks.end(), u); it != kinks.end() && *it < v; ++it) {
            total += adaptive_simpson(f, a, *it, q).value;
            a = *it;
        }
        total += adaptive_simpson(f, a, v, q).value;
        return total;
    }
    }
    return 0.0;
}

double Integrator::density(double t) const
{
    switch (ac_.kind()) {
    case AcPart::Kind::none: return 0.0;
    case AcPart::Kind::identity: return 1.0;
    case AcPart::Kind::density: return ac_.density_fn()(t);
    case AcPart::Kind::primitive:
        if (!ac_.density_fn()) throw SchemeUnsupported("integrator primitive has no density");
        return ac_.density_fn()(t);
    }
    return 0.0;
}

double Integrator::jump_at(double t) const
{
    const auto it = std::lower_bound(jumps_.begin(), jumps_.end(), t,
                                     [](const Jump& j, double x) { return j.time < x; });
    if (it != jumps_.end() && it->time == t) return it->size;
    return 0.0;
}

std::vector<double> Integrator::jump_times(double u, double v) const
{
    std::vector<double> out;
    for (const Jump& j : jumps_) {
        if (j.time >= u && j.time < v) out.push_back(j.time);
    }
    return out;
}

double Integrator::jump_mass(double u, double v) const
{
    double total = 0.0;
    for (const Jump& j : jumps_) {
        if (j.time >= u && j.time < v) total += j.size;
    }
    return total;
}

GValue Integrator::eval(double t) const
{
    if (!domain_.contains(t)) throw OutOfDomain(t);
    const double value = continuous(t) + jump_mass(domain_.t0, t);
    return {value, value + jump_at(t)};
}

double measure_interval(const Integrator& g, double u, double v)
{
    if (!g.domain().contains(u)) throw OutOfDomain(u);
    if (!g.domain().contains(v)) throw OutOfDomain(v);
    if (u > v) throw ReversedInterval(u, v);
    return g.continuous_increment(u, v) + g.jump_mass(u, v);
}

GValue g_eval(const Integrator& g, double t) { return g.eval(t); }

VectorIntegrator::VectorIntegrator(std::vector<Integrator> components)
    : components_(std::move(components))
{
    if (components_.empty()) throw InvalidIntegrator("vector integrator needs at least one component");
    for (const auto& g : components_) {
        if (!(g.domain() == components_.front().domain()))
            throw DomainMismatch("integrator components must share one domain");
    }
}

std::vector<double> merged_events(const VectorIntegrator& vg, double u, double v)
{
    std::vector<double> out;
    for (const auto& g : vg.components()) {
        const auto times = g.jump_times(u, v);
        out.insert(out.end(), times.begin(), times.end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<Jump> periodic_jumps(double start, double period, double size, double end)
{
    if (!(period > 0.0)) throw InvalidIntegrator("jump rule period must be positive");
    std::vector<Jump> out;
    for (std::size_t k = 0;; ++k) {
        const double t = start + period * static_cast<double>(k);
        if (t > end) break;
        out.push_back({t, size});
    }
    return out;
}

} // namespace stieltjes
