#pragma once

namespace udd {

/// Parses and runs a toolkit subcommand. Returns the process exit code:
/// 0 success, 2 input error, 3 degenerate-estimation error.
int run_cli(int argc, const char* const* argv);

}  // namespace udd
