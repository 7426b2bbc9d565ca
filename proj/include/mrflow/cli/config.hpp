#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mrflow/flow_fields.hpp"
#include "mrflow/mild_solver.hpp"
#include "mrflow/params.hpp"
#include "mrflow/variational_ftle.hpp"

namespace mrflow::cli {

/// Raised for malformed or inconsistent configuration; the message names the key.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using ConfigValue = std::variant<double, bool, std::string, std::vector<double>>;

/// Flat `key = value` file. Values: numbers, true/false, bare or quoted strings, [x, y, ...].
/// `[section]` headers prefix the following keys with `section.`; `#` starts a comment.
class ConfigFile {
public:
    static ConfigFile parse(const std::string& text, const std::string& source = "<config>");
    static ConfigFile load(const std::string& path);

    [[nodiscard]] bool has(const std::string& key) const { return values_.count(key) != 0; }
    [[nodiscard]] bool empty() const { return values_.empty(); }

    std::optional<double> number(const std::string& key);
    std::optional<bool> boolean(const std::string& key);
    std::optional<std::string> string(const std::string& key);
    std::optional<std::vector<double>> array(const std::string& key);

    /// Throws ConfigError naming the first key that no getter consumed.
    void reject_unused() const;

private:
    struct Entry {
        ConfigValue value;
        int line = 0;
        bool used = false;
    };
    const Entry* take(const std::string& key);
    [[noreturn]] void type_error(const std::string& key, const char* expected) const;

    std::string source_;
    std::map<std::string, Entry> values_;
};

struct FieldConfig {
    FieldSpec spec = FieldSpec::quiescent(2);
};

struct ParticleConfig {
    double R = 0.0;
    double St = 0.0;
    double Re = 0.0;
    Vec g;
    std::optional<double> kappa;
    Vec y0;
    std::optional<Vec> v0;
    std::optional<Vec> w0;
};

struct SolverConfig {
    SolveMode mode = SolveMode::mild;
    SolveOptions options;
};

struct TimeConfig {
    double t0 = 0.0;
    double t_end = 1.0;
};

struct OutputConfig {
    std::string csv = "trajectory.csv";
    std::string json = "summary.json";
};

struct FtleConfig {
    std::optional<Box> box;
    std::vector<int> resolution;
    double T = 1.0;
    W0Policy policy;
    std::string csv = "ftle.csv";
    std::string json = "ftle.json";
};

struct ProbeConfig {
    std::size_t pairs = 200;
    std::size_t intervals = 32;
    std::optional<double> window;
    std::string json = "probe.json";
};

struct ValidateConfig {
    std::size_t example_nodes = 2000;  ///< total nodes on [0, 1] for the closed-form comparison
    std::size_t rl_nodes = 4096;
    double fd_step = 1e-5;
    double horizon = 0.5;              ///< field-dependent checks run on [t0, t0 + horizon]
    double reference_horizon = 1.0;
    std::size_t probe_pairs = 200;
    std::string json = "validation.json";
};

struct RunConfig {
    FieldConfig field;
    ParticleConfig particle;
    TimeConfig time;
    SolverConfig solver;
    OutputConfig output;
    FtleConfig ftle;
    ProbeConfig probe;
    ValidateConfig validate;
    std::uint64_t seed = 42;

    [[nodiscard]] MRParams params() const;
    /// Initial relative velocity from v0 or w0 (zero if neither is given).
    [[nodiscard]] Vec initial_w() const;
};

/// Typed view of a parsed file; validates every key before any computation.
RunConfig build_run_config(ConfigFile file);

}  // namespace mrflow::cli
