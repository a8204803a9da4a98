#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dbarlab {

// Exit codes: 0 success, 1 config error, 2 numerical failure,
// 3 inconclusive under --strict.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dbarlab
