#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "qudit/config.hpp"

namespace qudit {

/// Process exit status of a subcommand.
enum class ExitCode : int {
  ok = 0,
  failure = 1,         // numerical or internal error
  usage = 2,           // bad configuration or command line
  missing_data = 3,    // data file or directory absent
  malformed_data = 4,  // CSV that cannot be parsed
  fit_failed = 5,      // no trace could be fitted
  partial = 6,         // some inputs failed, the rest were processed
};

struct CommandContext {
  RunConfig config;
  std::filesystem::path out_dir = ".";
  /// Baseline table for heatcap; trace files or directories for fit-decay and nutation.
  std::vector<std::filesystem::path> data;
  bool allow_large_rank = false;
};

struct CommandResult {
  ExitCode code = ExitCode::ok;
  std::string summary;
  std::vector<std::filesystem::path> files;
};

/// spectrum, heatcap, chi, levels, rabi-map, universality, fit-decay, nutation.
const std::vector<std::string>& subcommand_names();

/// Runs one pipeline and writes `<task>_<name>_<hash>.csv` (plus companion
/// files for fit-decay and nutation) into `out_dir`, each starting with
/// `# tool=` / `# config_hash=` comment lines. Prints the summary line to
/// `out` and every error, warning and note to `err`. Never throws for
/// configuration, data or fit problems; these map to the exit codes above.
CommandResult run_subcommand(const std::string& name, const CommandContext& context, std::ostream& out,
                             std::ostream& err);

/// Output file path for a task under the given configuration.
std::filesystem::path output_path(const std::filesystem::path& out_dir, const std::string& task,
                                  const RunConfig& config);

}  // namespace qudit
