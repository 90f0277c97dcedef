#pragma once

namespace pic::cli {

// Full command-line entry point: parses argv, dispatches the subcommand,
// writes outputs and a run manifest under --out. Exit codes: 0 clean,
// 1 sample-level failures (errors.json lists them), 2 usage/config errors.
int run(int argc, const char* const* argv);

} // namespace pic::cli
