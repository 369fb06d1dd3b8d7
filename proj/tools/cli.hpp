#pragma once

#include <iosfwd>

namespace gridflux::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // runtime failure, or validate beyond tolerance
inline constexpr int kExitUsage = 2;
inline constexpr int kExitDegraded = 3;

/// Entry point shared by the gridflux executable and the tests.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gridflux::cli
