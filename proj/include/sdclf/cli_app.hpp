#pragma once

namespace sdclf {

// Full command-line entry point (design / simulate / sweep / consistency).
// Exit codes: 0 success, 1 check failed, 2 configuration error, 3 I/O error.
int run_cli(int argc, const char* const* argv);

}  // namespace sdclf
