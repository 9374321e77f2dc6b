#ifndef STIELTJES_CONFIG_HPP
#define STIELTJES_CONFIG_HPP

#include "stieltjes/expr.hpp"
#include "stieltjes/extremal.hpp"
#include "stieltjes/field.hpp"
#include "stieltjes/integrator.hpp"
#include "stieltjes/models.hpp"
#include "stieltjes/solver.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace stieltjes {

struct MethodConfig {
    Scheme scheme = Scheme::rk4_density;
    std::size_t mesh = 1000;
    /// Iteration tolerance (extremal, functional outer loop).
    double tol = 1e-6;
    std::size_t max_iter = 200;
    Direction direction = Direction::greatest;
    std::size_t window_cells = 0;
    double verify_tol = 1e-8;
    std::size_t samples = 10000;
    std::uint64_t seed = 1;
    std::size_t outer_max = 50;
};

struct OutputConfig {
    /// Empty: results go to stdout only.
    std::filesystem::path dir;
    bool csv = true;
    bool json = true;
};

struct ModelConfig {
    BacteriaParams params;
    LowerOption lower = LowerOption::zero;
};

/// A validated configuration with every object built.
struct Config {
    std::size_t n = 0;
    Interval window;
    std::vector<double> y0;
    Env parameters;
    Field field;
    /// Set when field expressions read mean1..meann of a frozen trajectory,
    /// or for the functional bacteria model.
    std::optional<FunctionalField> functional;
    std::optional<VectorIntegrator> vg;
    std::optional<Bracket> bracket;
    std::optional<ModelConfig> model;
    MethodConfig method;
    OutputConfig output;
};

/// Parses and validates a JSON document. Relative paths resolve against
/// `base_dir`. Throws ConfigError carrying a JSON pointer.
Config parse_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
Config load_config(const std::filesystem::path& path);

/// Driver from a JSON descriptor
/// {"ac": {"kind": "none|identity|density|primitive", "expr": "...", "kinks": [...]},
///  "jumps": [{"t": 2, "size": 1}] | {"rule": {"period": 2, "size": 1, "start": 2}}}.
/// The name "bacteria" as a bare string selects the built-in driver.
Integrator parse_integrator(std::string_view json_text, Interval domain, const Env& params = {});

} // namespace stieltjes

#endif // STIELTJES_CONFIG_HPP
