#pragma once

#include <iosfwd>

namespace stumpforge::cli {

/// Parses argv and runs one command. Returns the process exit code:
/// 0 on success, 2 on usage or validation errors, 1 otherwise.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace stumpforge::cli
