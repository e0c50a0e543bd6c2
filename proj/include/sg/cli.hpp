#pragma once

#include <iosfwd>

namespace sg {

/// Entry point of the `sg` tool. Exit codes: 0 success, 1 usage error,
/// 2 data error (malformed records, failed solves, I/O).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sg
