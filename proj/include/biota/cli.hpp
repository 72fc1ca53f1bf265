#pragma once

#include <iosfwd>

namespace biota {

/// Entry point of the `biota` tool.  Returns 0 on success, 1 for bad input or
/// usage, 2 for internal failures.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace biota
