#pragma once

// Command-line entry point. Exit codes: 0 success, 1 runtime or numeric
// failure, 2 usage or configuration error.

namespace xgan::cli {

int run(int argc, const char* const* argv);

}  // namespace xgan::cli
