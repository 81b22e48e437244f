#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rider::app {

/// Exit codes: 0 success, 1 invalid input or usage, 2 a run stopped early.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rider::app
