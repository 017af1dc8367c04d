#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "config.hpp"

namespace nvmag::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitConfig = 2,
  kExitAnalysis = 3,
  kExitIo = 4,
  kExitInternal = 5,
};

struct CommandOptions {
  std::string scenario_path;  // empty: built-in defaults
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::string input_path;        // psd, allan, rx
  std::string calibration_path;  // sense
};

// Runs one subcommand, writing its CSV and JSON into out_dir and a short
// summary to `out`. Library and config errors propagate as exceptions.
Json run_command(const std::string& name, const CommandOptions& options, std::ostream& out);

// Full command line entry point; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nvmag::cli
