#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mrflow/cli/config.hpp"

namespace mrflow::cli {

struct CommandContext {
    std::filesystem::path out_dir = ".";
    std::optional<std::uint64_t> seed;  ///< overrides the config seed
    unsigned threads = 1;
};

struct Check {
    std::string name;
    std::string description;
    double measured = 0.0;
    double threshold = 0.0;
    bool pass = false;
    bool skipped = false;
    std::string note;
};

struct ValidationReport {
    std::vector<Check> checks;

    /// True iff every check that ran passed.
    [[nodiscard]] bool passed() const;
    [[nodiscard]] nlohmann::json to_json() const;
};

/// Writes the trajectory CSV and JSON summary; returns the summary.
nlohmann::json run_simulate(const RunConfig& config, const CommandContext& ctx);

ValidationReport run_validate(const RunConfig& config, const CommandContext& ctx);

/// Writes the FTLE grid CSV and metadata JSON; returns the metadata.
nlohmann::json run_ftle(const RunConfig& config, const CommandContext& ctx);

/// Writes the certificate and contraction ratios; returns the report.
nlohmann::json run_probe(const RunConfig& config, const CommandContext& ctx);

/// Full command-line entry point; returns the process exit code.
int main_entry(int argc, char** argv);

}  // namespace mrflow::cli
