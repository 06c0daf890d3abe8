#pragma once

namespace nvphys::cli {

/// Entry point of the nvphys tool.  Returns the process exit code:
/// 0 success, 2 input error, 3 numerical failure.
int run(int argc, const char* const* argv);

}  // namespace nvphys::cli
