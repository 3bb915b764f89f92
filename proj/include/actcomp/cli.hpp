#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace actcomp::cli {

inline constexpr int kReportSchemaVersion = 1;

/// Runs the experiment driver with `args` (program name excluded). Reports go
/// to `out` unless a command writes a file; diagnostics go to `err`.
/// Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace actcomp::cli
