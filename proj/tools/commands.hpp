#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace blocktau::cli {

// Runs one subcommand. `args` excludes the program name. Results go to `out`;
// failures print a JSON object {"error", "message", ...} to `err` and return
// a nonzero status.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace blocktau::cli
