#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace pem::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kConvergenceError = 3, kIoError = 4 };

/// Runs pem-cli with `args` (program name excluded). Normal output goes to
/// `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace pem::cli
