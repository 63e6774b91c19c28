// Command-line driver: simulate, reliance, bands, parity and rank.
#pragma once

namespace rely {

// Parses argv, runs one command and returns the process exit code:
// 0 success, 1 usage or config error, 2 data error, 3 numerical failure.
// Failures print one machine-parseable line to stderr:
//   error: <usage|data|numeric>: <message>
int run_cli(int argc, const char* const* argv);

} // namespace rely
