#pragma once

// Command-line front end. `run` takes the arguments after the program name and
// returns the process exit status: 0 success, 1 runtime/model error, 2 usage
// or parse error.

#include <iosfwd>
#include <string>
#include <vector>

namespace tvparcor::cli {

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tvparcor::cli
