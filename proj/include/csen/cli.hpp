#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace csen {

// Runs the command line; args exclude the program name. Returns the exit
// code: 0 success, 1 usage error, 2 data error, 3 numeric error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int cli_main(int argc, char** argv);

}  // namespace csen
