#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace apxne {

/// Exit codes shared by the subcommands.
enum ExitCode : int {
  kExitFound = 0,       // solve: NeFound, best-alpha: Converged, other commands: success
  kExitNotFound = 1,    // solve: NoNeExists, best-alpha: AlphaUnbounded
  kExitLimit = 2,       // time, node or cut-round limit
  kExitInput = 3,       // I/O, parse or validation failure
  kExitUsage = 4,
};

/// Runs `apxne <subcommand> ...`; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// ECDF tables from a directory of result documents: (ecdf.csv, alpha.csv).
std::pair<std::string, std::string> build_report(const std::string& results_dir);

}  // namespace apxne
