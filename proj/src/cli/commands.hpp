#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qtail::cli {

// Parses and executes one invocation. Returns the process exit code:
// 0 success, 2 parameter-domain error, 3 numerical failure.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

} // namespace qtail::cli
