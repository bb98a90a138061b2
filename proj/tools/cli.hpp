#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fkn::cli {

/// Runs one subcommand. `args` excludes the program name. Returns the process
/// exit code (see fkn::ExitCode).
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fkn::cli
