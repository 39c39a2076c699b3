#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace frk {

// Runs the command-line frontend on the given argument list (without the
// program name).  Output goes to `out`, diagnostics to `err`.
//
// Exit codes: 0 ok, 1 usage/parse error, 2 precondition failure,
// 3 invariant/bound violation (the loud one: it falsifies the implementation,
// never the inputs).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace frk
