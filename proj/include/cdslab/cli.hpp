#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cdslab {

/// Process exit codes; each failure cause maps to exactly one code.
enum ExitCode : int {
  kExitOk = 0,
  kExitAssertion = 1,    // tangency assertion failed
  kExitInvalid = 2,      // parse or validation failure
  kExitDegenerate = 3,   // degenerate premium leg
  kExitConvergence = 4,  // --assert-convergence failed
  kExitFault = 5,        // simulation fault rate above the limit
};

/// Runs the command line `args` (args[0] is the program name).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Git blob id (SHA-1 of "blob <size>\0" + bytes) of a byte string.
std::string git_blob_sha1(const std::string& bytes);

}  // namespace cdslab
