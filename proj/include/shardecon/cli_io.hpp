#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "shardecon/simulator.hpp"

namespace shardecon {

inline constexpr std::string_view artifact_version = "1.0.0";

/// Parses the line-oriented `key = value` format (`#` starts a comment).
/// Unknown keys and malformed values throw ConfigError with the line number.
/// Keys absent from the text keep their SimConfig defaults.
SimConfig parse_config(std::istream& in, const std::string& source = "<config>");
SimConfig load_config(const std::filesystem::path& path);

/// Every key, fully resolved, in a form parse_config reads back unchanged.
std::string render_config(const SimConfig& config);

/// height, M0, M1, M2, ratio, Q, P, R, GPL, GN, I, s, capacity, pending,
/// registrations, maturations, confiscations, maintainers
const std::vector<std::string>& csv_columns();

std::string csv_header();
std::string csv_row(const IntervalRecord& record);
void write_csv(std::ostream& out, std::span<const IntervalRecord> records);

/// Parses a CSV written by write_csv. Integer columns come back exactly;
/// ratio and I carry 12 significant digits.
std::vector<IntervalRecord> read_csv(std::istream& in);

struct RunPaths {
    std::filesystem::path csv;
    std::filesystem::path manifest;
    std::filesystem::path oplog;  // empty when not requested
};

/// The resolved configuration plus provenance comments. The manifest is
/// itself a valid config file: running it reproduces the run.
std::string render_manifest(const SimConfig& config, const RunPaths& paths);

/// Command-line entry point (`security` and `run` subcommands).
/// Exit codes: 0 success, 2 usage or config error, 3 I/O error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace shardecon
