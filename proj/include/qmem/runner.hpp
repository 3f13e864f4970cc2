#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace qmem {

enum ExitCode : int { exit_ok = 0, exit_validation = 2, exit_numerical = 3 };

// Command-line values that replace the matching config fields.
struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output;
    std::optional<std::string> format;
    std::optional<double> epsilon;
    std::optional<double> delta;
    std::optional<long long> samples;
};

// Experiment name as used in configs ("criteria_scan", ...) for a CLI
// subcommand ("criteria-scan", ...); empty when unknown.
std::string experiment_for_subcommand(const std::string& subcommand);

// Config used when a subcommand runs without a file.
nlohmann::json default_config(const std::string& experiment);

// Validates and runs one experiment. The summary line goes to out, diagnostics
// to err; the return value is the process exit code.
int run(nlohmann::json config, const Overrides& overrides, std::ostream& out, std::ostream& err);
int run(const std::filesystem::path& config_path, const Overrides& overrides, std::ostream& out, std::ostream& err);
// Subcommand entry: the file (if any) must describe the same experiment;
// without one the built-in defaults are used.
int run(const std::string& experiment, const std::optional<std::filesystem::path>& config_path,
        const Overrides& overrides, std::ostream& out, std::ostream& err);

} // namespace qmem
