#pragma once

namespace tailrank {

// Exit codes: 0 success, 2 config error, 3 data validation error,
// 4 numeric failure.
int run_cli(int argc, const char* const* argv);

}  // namespace tailrank
