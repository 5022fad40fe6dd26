#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qtnet::cli {

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kValidation = 2,
    kNumerical = 3,
    kPartial = 4,
};

std::string tool_version();

// Runs one command line (args exclude the program name). Diagnostics go to
// `err`, short progress/summary lines to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

}  // namespace qtnet::cli
