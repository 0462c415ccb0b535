#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace surfdyn::cli {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kVersion = "0.1.0";

std::vector<std::string> subcommands();

// Validates a raw config for `command` and returns it with every default
// filled in. Unknown keys and bad values raise ConfigError naming the field.
json resolve_config(const std::string& command, const json& raw,
                    std::optional<std::uint64_t> seed = std::nullopt);

struct Outcome {
  int exit_code = 0;  // 0 ok, 2 fail/contradicted, 1 error
  json report;
};

// Runs one subcommand, writes report.json plus CSV files under out_dir and
// returns the report. Errors are captured in the report, never thrown,
// except for an unwritable output directory.
Outcome run(const std::string& command, const json& raw, const std::filesystem::path& out_dir,
            std::optional<std::uint64_t> seed = std::nullopt);

// Reads a JSON config file first; an unreadable or malformed file gives an
// error report.
Outcome run_file(const std::string& command, const std::filesystem::path& config,
                 const std::filesystem::path& out_dir,
                 std::optional<std::uint64_t> seed = std::nullopt);

// Numbers that JSON cannot carry are written as strings.
json number(double v);

}  // namespace surfdyn::cli
