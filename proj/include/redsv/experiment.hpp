#pragma once

#include "redsv/analyzer.hpp"
#include "redsv/config.hpp"
#include "redsv/netsim.hpp"

#include <cstdint>
#include <string>

namespace redsv::experiment {

struct Result {
    std::uint64_t frames_sent = 0;
    std::uint64_t dropped = 0;    // by the channel
    std::uint64_t reordered = 0;  // by the channel
    analyzer::LinkStats stats;
    std::vector<analyzer::AcceptedRecord> accepted;
};

/// Virtual-time run: source -> codec -> simulated channel -> analyzer.
/// Frame k leaves at k sample intervals and carries smpCnt k mod the
/// configured samples per second. Deterministic for a given channel seed.
Result run(const config::RunConfig& cfg, const netsim::ChannelSpec& channel, std::uint64_t frames,
           bool keep_accepted = false);

/// Stats report plus the injected-vs-measured comparison.
std::string render(const Result& result, const netsim::ChannelSpec& channel);

} // namespace redsv::experiment
