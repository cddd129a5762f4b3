#pragma once
// Command-line front end. run() is the whole program minus process setup.

#include <ostream>
#include <string>
#include <vector>

namespace kgr::cli {

// args excludes the program name. Returns the process exit status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kgr::cli
