#pragma once

#include "cli/config.hpp"

#include "ostro/analysis.hpp"

#include <exception>
#include <iosfwd>

namespace ostro::cli {

enum ExitCode : int {
    exit_ok = 0,
    exit_config = 2,
    exit_degenerate = 3,
    exit_integration = 4,
};

struct RunOptions {
    bool symbolic = false;
    bool timing = false;
    bool emit_gnuplot = false;
    int jobs = 1;
};

std::string_view version() noexcept;

int cmd_derive(const RunConfig& config, const RunOptions& options, std::ostream& out);
int cmd_simulate(const RunConfig& config, const RunOptions& options);
int cmd_analyze(const RunConfig& config, const RunOptions& options);
int cmd_sweep(const RunConfig& config, const RunOptions& options);

/// Full comparison for one configuration; shared by analyze and sweep.
ComparisonReport run_comparison(const RunConfig& config);

/// Maps an in-flight exception onto the exit-code contract.
int exit_code_for(const std::exception_ptr& error) noexcept;

/// Entry point of the `ostro` executable.
int run(int argc, char** argv);

}  // namespace ostro::cli
