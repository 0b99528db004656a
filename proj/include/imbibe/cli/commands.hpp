/**
 * @file commands.hpp
 * @brief The simulate, reconstruct, calibrate and converge commands.
 *
 * Each command reads a JSON config (see configs/ for annotated samples),
 * writes its outputs plus a verbatim copy of the config and the resolved
 * settings into the output directory, and reports what it wrote.
 */
#pragma once

#include <json.hpp>

#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <vector>

namespace imbibe::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitConfig = 2,
    kExitNumerical = 3,
    kExitData = 4,
};

/// Invalid invocation, such as a command given nothing to work on.
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct CommandOptions {
    /// Empty: built-in defaults only.
    std::filesystem::path config;
    std::filesystem::path out = "out";
    std::optional<std::uint64_t> seed;
    /// Run simulate even when dt exceeds the stability bound.
    bool force = false;
    std::optional<bool> use_reconstructed;
    std::optional<bool> weights_from_coarse;
    /// Empty: the installed materials table.
    std::filesystem::path materials;
};

struct CommandResult {
    std::vector<std::filesystem::path> files;
    nlohmann::json summary;
};

CommandResult cmd_simulate(const CommandOptions& options);
CommandResult cmd_reconstruct(const CommandOptions& options);
CommandResult cmd_calibrate(const CommandOptions& options);
CommandResult cmd_converge(const CommandOptions& options);

/// Exit code for an exception escaping a command.
int exit_code_for(const std::exception& e) noexcept;

} // namespace imbibe::cli
