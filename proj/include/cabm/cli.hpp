#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cabm {

/// Resolved top-level settings shared by the subcommands (individual
/// subcommands add their own knobs on top). Populated from, in order of
/// precedence: command-line flags, a key=value config file (--config), the
/// CABM_SEED environment variable (seed default only), built-in defaults.
struct RunConfig {
  std::string subcommand;
  double theta = 0.0;
  double t = 1.0;
  double dt = 1e-3;
  std::uint64_t reps = 10000;
  std::uint64_t seed = 1;
  std::string data;    // initial-data descriptor: inline JSON or a file path
  std::string out;     // output file; empty writes to stdout
  std::string format;  // "csv" or "json"
};

/// Entry point behind main(): parses `args` (without the program name),
/// runs the requested subcommand, writes its report to `out` (or the --out
/// file) and diagnostics to `err`. Returns 0 on success, 1 when a requested
/// check fails, 2 for invalid usage. Identical invocations produce
/// byte-identical output.
int cliMain(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace cabm
