#pragma once

namespace warpchart::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsageError = 1;
inline constexpr int kAlarm = 2;
inline constexpr int kRuntimeFailure = 3;

int run(int argc, const char* const* argv);

}  // namespace warpchart::cli
