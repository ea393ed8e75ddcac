#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace icicl::cli {

/// Runs one command line (without the program name). Exit codes: 0 success,
/// 1 run-level failure, 2 usage error.
int run(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace icicl::cli
