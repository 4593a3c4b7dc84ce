#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cfmoll/mollify.hpp"

namespace cfmoll {

enum class Command { invert, mollify, converge, clt_demo, selfcheck };

inline constexpr int exit_ok = 0;
inline constexpr int exit_validation = 2;
inline constexpr int exit_numeric = 3;

struct RunConfig {
    Command command = Command::selfcheck;
    /// invert/mollify: one spec; converge: the sequence, in order.
    std::vector<std::string> spec_paths;
    std::string target_path;
    std::string grid;
    std::optional<double> sigma;
    std::vector<int> k_schedule;
    double epsilon = 0.1;
    /// Empty: write the main artifact to stdout and skip the companion file.
    std::string out;
    std::uint64_t seed = 20210601;
    MollificationParams params;
};

/// Fills `config` from a JSON config file. Relative paths inside the file are
/// resolved against the file's directory.
void apply_config_file(RunConfig& config, const std::string& path);

/// Thrown by parse_args for --help; what() is the help text.
struct HelpRequested : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Parses argv (subcommand plus flags). Values from --config are applied
/// first and explicit flags override them. Throws ValidationError.
RunConfig parse_args(int argc, const char* const* argv);

/// Executes a configuration; returns the process exit status. Errors are
/// reported on `err`.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// parse_args + run with exit-status mapping (0 ok, 2 validation, 3 numeric).
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

struct CheckResult {
    std::string name;
    bool passed;
    std::string detail;
};

/// Closed-form invariant suite behind `cfmoll selfcheck`.
std::vector<CheckResult> run_selfcheck(std::uint64_t seed, int threads);

} // namespace cfmoll
