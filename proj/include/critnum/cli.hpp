#pragma once

#include <optional>
#include <string>
#include <vector>

namespace critnum::cli {

enum ExitCode : int
{
    exit_ok = 0,
    exit_disagreement = 1, ///< formula vs oracle mismatch, bound violation, failed certificate
    exit_usage = 2,        ///< bad arguments or a violated precondition
    exit_budget = 3,
};

struct Environment
{
    /// Results cache directory; nullopt disables the cache.
    std::optional<std::string> cache_dir;
};

/// The cache directory from $CRITNUM_CACHE_DIR, else ~/.cache/critnum.
Environment environment_from_process();

struct RunResult
{
    int exit_code = exit_ok;
    std::string header;  ///< version, wall time and cache status; varies between runs
    std::string payload; ///< deterministic given the arguments
    std::string errors;  ///< diagnostics for stderr
};

/// Runs one command line (without the program name) in-process.
RunResult execute(const std::vector<std::string> & args, const Environment & env = {});

} // namespace critnum::cli
