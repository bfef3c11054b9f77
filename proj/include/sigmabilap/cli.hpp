#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sigmabilap::cli {

enum ExitCode { kOk = 0, kUsage = 1, kNumerical = 2 };

// args[0] is the program name. Output goes to out unless -o is given.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sigmabilap::cli
