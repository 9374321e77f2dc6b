#ifndef STIELTJES_ERROR_HPP
#define STIELTJES_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace stieltjes {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---- expressions ----------------------------------------------------------

class SyntaxError : public Error {
public:
    SyntaxError(std::size_t offset, std::vector<std::string> expected, const std::string& detail);

    std::size_t offset() const noexcept { return offset_; }
    const std::vector<std::string>& expected() const noexcept { return expected_; }

private:
    std::size_t offset_;
    std::vector<std::string> expected_;
};

class UnknownFunction : public Error {
public:
    explicit UnknownFunction(std::string name);
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

class ArityMismatch : public Error {
public:
    ArityMismatch(std::string name, std::size_t expected, std::size_t got);
};

class UnboundVariable : public Error {
public:
    explicit UnboundVariable(std::string name);
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

class DomainError : public Error {
public:
    using Error::Error;
};

// ---- functions on a time window ------------------------------------------

class OutOfDomain : public Error {
public:
    explicit OutOfDomain(double t);
    double time() const noexcept { return t_; }

private:
    double t_;
};

class DomainMismatch : public Error {
public:
    using Error::Error;
};

class InvalidGrid : public Error {
public:
    using Error::Error;
};

class InvalidIntegrator : public Error {
public:
    using Error::Error;
};

class ReversedInterval : public Error {
public:
    ReversedInterval(double u, double v);
};

// ---- integration / solving -----------------------------------------------

class ToleranceNotMet : public Error {
public:
    ToleranceNotMet(double a, double b, double estimate);
};

class MeshMissingJump : public Error {
public:
    explicit MeshMissingJump(double t);
    double time() const noexcept { return t_; }

private:
    double t_;
};

class FieldEvaluationError : public Error {
public:
    FieldEvaluationError(double t, std::size_t component, const std::string& cause);
    double time() const noexcept { return t_; }
    std::size_t component() const noexcept { return component_; }

private:
    double t_;
    std::size_t component_;
};

class SchemeUnsupported : public Error {
public:
    using Error::Error;
};

class NonFiniteState : public Error {
public:
    explicit NonFiniteState(double t);
    double time() const noexcept { return t_; }

private:
    double t_;
};

class NoConvergence : public Error {
public:
    using Error::Error;
};

class InvalidParams : public Error {
public:
    using Error::Error;
};

class MissingAnchors : public Error {
public:
    using Error::Error;
};

class SegmentNotFound : public Error {
public:
    explicit SegmentNotFound(double t);
};

/// Configuration problems; `pointer` is a JSON pointer into the config document.
class ConfigError : public Error {
public:
    ConfigError(std::string pointer, const std::string& message);
    const std::string& pointer() const noexcept { return pointer_; }

private:
    std::string pointer_;
};

} // namespace stieltjes

#endif // STIELTJES_ERROR_HPP
