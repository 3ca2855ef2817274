#pragma once

#include <iosfwd>

namespace ssc::cli {

/// Exit codes: 0 success, 2 invalid input or flags, 3 numerical failure,
/// 1 anything unexpected.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ssc::cli
