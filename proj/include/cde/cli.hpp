#pragma once

#include <iosfwd>

namespace cde::cli {

enum ExitCode : int { ok = 0, usage_error = 1, runtime_error = 2 };

/// Entry point shared by the `cde` binary and the CLI tests. Subcommands:
/// run, experiment, compare, list-problems.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cde::cli
