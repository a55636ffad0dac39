#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace eqwave::cli {

enum Exit { ok = 0, verification_failure = 1, input_error = 2 };

// Runs one command line (args exclude the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace eqwave::cli
