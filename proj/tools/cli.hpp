#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace pmor::cli {

/// Runs one command line (without the program name). Returns the process
/// exit status: 0 success, 2 failed verification, bound or stability check,
/// 1 for usage, schema, I/O and structural errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pmor::cli
