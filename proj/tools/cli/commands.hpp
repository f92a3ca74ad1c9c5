// commands.hpp: subcommands of the heom command-line tool

#pragma once

#include <exception>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "config.hpp"
#include "heom/criteria.hpp"

namespace heom::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitInternal = 1,
    kExitArgument = 2,
    kExitRefused = 3,
    kExitDivergence = 4,
    kExitResource = 5,
};

// Thrown when the accuracy criteria reject a run and --force was not given.
class CriteriaRefusal : public Error {
public:
    using Error::Error;
};

// Exit code and short kind label for an exception escaping a command.
ExitCode exit_code_for(const std::exception& e) noexcept;
std::string_view error_kind(const std::exception& e) noexcept;

// args excludes the program name. Errors go to err as one line:
//   error: <kind>: <message>
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Temp file in the same directory, then rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string trajectory_csv(const PropagationResult& result, double time_scale);

struct PropagateOptions {
    std::filesystem::path out_dir{"heom_run"};
    bool force{false};
};

// Writes trajectory.csv and run.json into options.out_dir; returns the report used for the gate.
AccuracyReport run_propagation(const RunConfig& config, const PropagateOptions& options, std::ostream& log);

}  // namespace heom::cli
