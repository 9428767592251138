#pragma once

#include <string>
#include <vector>

namespace snvsim {

// Command-line entry point. Exit codes: 0 success, 2 configuration or input
// error (message on stderr), 1 runtime failure.
int cli_main(const std::vector<std::string>& args);

}  // namespace snvsim
