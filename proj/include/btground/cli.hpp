#pragma once

#include <string>
#include <vector>

namespace btground {

/// Exit codes: 0 success, 1 incomplete grounding / failed run,
/// 2 input error, 3 resource error.
int cli_main(const std::vector<std::string>& args);
int cli_main(int argc, char** argv);

}  // namespace btground
