#include "stieltjes/error.hpp"

#include <sstream>

namespace stieltjes {

namespace {

std::string join(const std::vector<std::string>& items)
{
    std::string out;
    for (std::size_t k = 0; k < items.size(); ++k) {
        if (k) out += ", ";
        out += items[k];
    }
    return out;
}

std::string num(double x)
{
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

} // namespace

SyntaxError::SyntaxError(std::size_t offset, std::vector<std::string> expected, const std::string& detail)
    : Error("syntax error at offset " + std::to_string(offset) + ": " + detail
            + (expected.empty() ? std::string{} : " (expected " + join(expected) + ")"))
    , offset_(offset)
    , expected_(std::move(expected))
{}

UnknownFunction::UnknownFunction(std::string name)
    : Error("unknown function '" + name + "'")
    , name_(std::move(name))
{}

ArityMismatch::ArityMismatch(std::string name, std::size_t expected, std::size_t got)
    : Error("function '" + name + "' takes " + std::to_string(expected) + " argument(s), got "
            + std::to_string(got))
{}

UnboundVariable::UnboundVariable(std::string name)
    : Error("unbound variable '" + name + "'")
    , name_(std::move(name))
{}

OutOfDomain::OutOfDomain(double t)
    : Error("time " + num(t) + " is outside the domain")
    , t_(t)
{}

ReversedInterval::ReversedInterval(double u, double v)
    : Error("reversed interval [" + num(u) + ", " + num(v) + "]")
{}

ToleranceNotMet::ToleranceNotMet(double a, double b, double estimate)
    : Error("quadrature tolerance not met on [" + num(a) + ", " + num(b) + "], error estimate "
            + num(estimate))
{}

MeshMissingJump::MeshMissingJump(double t)
    : Error("mesh is missing the jump time " + num(t))
    , t_(t)
{}

FieldEvaluationError::FieldEvaluationError(double t, std::size_t component, const std::string& cause)
    : Error("field component " + std::to_string(component + 1) + " failed at t=" + num(t) + ": " + cause)
    , t_(t)
    , component_(component)
{}

NonFiniteState::NonFiniteState(double t)
    : Error("non-finite state at t=" + num(t))
    , t_(t)
{}

SegmentNotFound::SegmentNotFound(double t)
    : Error("no floor segment covers t=" + num(t))
{}

ConfigError::ConfigError(std::string pointer, const std::string& message)
    : Error((pointer.empty() ? std::string("/") : pointer) + ": " + message)
    , pointer_(std::move(pointer))
{}

} // namespace stieltjes
