#pragma once

#include <iosfwd>

namespace mvocc {

/// Entry point of the `mvocc` tool. Returns the process exit status:
/// 0 on success, 1 for invalid input or configuration, 2 for failures during
/// computation or output.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace mvocc
