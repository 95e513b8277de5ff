#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace smc::cli {

enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,     ///< validate / crosscheck ran but a tolerance was missed
  kConfigError = 2,
  kNumericalAbort = 3,  ///< diagnostics up to the abort are still written
  kIoError = 4,
};

/// One parsed command line, before any key is interpreted.
struct Invocation {
  std::string command;
  std::vector<std::string> assignments;  ///< key=value
  std::optional<std::filesystem::path> config_file;
  std::filesystem::path out = "smcflow-out";
  // dedicated flags; they override key=value and the config file
  std::optional<std::string> dt, T, stride, tol_profile, suite;
};

const std::vector<std::string>& subcommands();

/// Runs one subcommand: writes its artifacts and manifest.txt under
/// inv.out and returns the exit status. Never throws.
int execute(const Invocation& inv, std::ostream& out, std::ostream& err);

/// Command-line front end (CLI11).
int main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace smc::cli
