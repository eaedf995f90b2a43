#pragma once

#include <string>
#include <vector>

namespace kdvlab {

/// Exit codes: 0 success, 1 validation error, 2 numerical failure.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);

}  // namespace kdvlab
