#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace splat2d {

/// Entry point of the `splat2d` command line tool. `args` excludes the
/// program name. Returns the process exit status; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace splat2d
