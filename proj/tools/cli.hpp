#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <string_view>

namespace redsv::cli {

enum ExitCode : int { kOk = 0, kRuntime = 1, kUsage = 2, kOverBudget = 3 };

/// Runs one command line. argv[0] is the program name.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Set from a signal handler to end publish/subscribe early.
std::atomic<bool>& interrupt_flag();

/// "5s", "250ms", "80us", "10ns"; a bare number is seconds.
std::chrono::nanoseconds parse_duration(std::string_view text);
/// "30M", "4.5k", "1G" or plain bits per second.
std::uint64_t parse_rate(std::string_view text);

} // namespace redsv::cli
