#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "relstring/scenario.hpp"
#include "relstring/transport.hpp"

namespace relstring {

/// Process exit codes, in order of precedence.
enum ExitCode : int {
    kExitOk = 0,
    kExitParse = 1,        // parse, IO and configuration errors
    kExitPhysicality = 2,  // causality, degeneracy or speed ordering
    kExitExistence = 3,    // the Ori existence criterion fails
    kExitBlowUp = 4,
    kExitConsistency = 5,
};

struct CommandOptions {
    std::optional<double> h;           // --grid-override h
    std::optional<std::size_t> cells;  // --grid-override cells:N
    std::optional<double> t_max;
    std::optional<std::filesystem::path> out;
};

/// Parses the --grid-override value: a step "0.01" or a cell count "cells:512".
void parse_grid_override(const std::string& text, CommandOptions& options);

/// Lattice for a scenario after command-line overrides.
TransportGrid scenario_grid(const Scenario& scenario, const CoordinateMap& map, const CommandOptions& options);

int cmd_check(const Scenario& scenario, const CommandOptions& options, std::ostream& out);
int cmd_simulate(const Scenario& scenario, const CommandOptions& options, std::ostream& out);
int cmd_compare(const Scenario& scenario, const CommandOptions& options, std::ostream& out);
int cmd_speeds(const Scenario& scenario, const CommandOptions& options, std::ostream& out);

/// Loads the scenario, runs the command and maps library errors to exit codes.
int run_command(const std::string& command, const std::filesystem::path& scenario_path, const CommandOptions& options,
                std::ostream& out, std::ostream& err);

}  // namespace relstring
