#pragma once

// The four CLI commands as library functions, so tests can drive them
// without spawning a process.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace hfclt {

enum ExitCode : int {
    kExitOk = 0,
    kExitIo = 1,
    kExitNotADensity = 2,
    kExitHypothesis = 3,
    kExitSlopeMiss = 4,
    kExitTheoremViolation = 5,
    kExitOracleDisagreement = 6,
    kExitFlaggedTruncation = 7,
};

struct RunConfig {
    std::vector<std::filesystem::path> densities;
    std::size_t n_max = 200;
    std::size_t dim = 512;
    std::vector<double> a_grid; // empty: built-in grid
    std::optional<std::pair<std::size_t, std::size_t>> window;
    std::size_t reps = 100000;
    std::uint64_t seed = 1;
    std::filesystem::path out = ".";
    std::string format = "csv";
    double slope_tol = 0.15;
    bool flip_q = false; // fault injection for the oracle command
};

/// Reads a JSON config. Relative density paths resolve against the config
/// file's directory. Throws InvalidConfig or Io.
[[nodiscard]] RunConfig load_config(const std::filesystem::path& path);

/// Parses "lo:hi". Throws InvalidConfig.
[[nodiscard]] std::pair<std::size_t, std::size_t> parse_window(const std::string& text);

/// Throws InvalidConfig if a parameter is out of range or no density is given.
void validate(const RunConfig& config);

[[nodiscard]] int cmd_check(const RunConfig& config, std::ostream& log);
[[nodiscard]] int cmd_run(const RunConfig& config, std::ostream& log);
[[nodiscard]] int cmd_verify(const RunConfig& config, std::ostream& log);
[[nodiscard]] int cmd_oracle(const RunConfig& config, std::ostream& log);

/// Dispatches by name and maps library errors to exit codes.
[[nodiscard]] int run_command(const std::string& name, const RunConfig& config,
                              std::ostream& log);

/// Writes `content` to a temporary sibling of `path`, then renames it.
void write_atomic(const std::filesystem::path& path, const std::string& content);

} // namespace hfclt
