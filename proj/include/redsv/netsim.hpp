#pragma once

#include "redsv/ber.hpp"
#include "redsv/pcg.hpp"

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace redsv::netsim {

using Duration = std::chrono::nanoseconds;

/// Impairment model of a lossy wireless hop.
struct ChannelSpec {
    double loss_probability = 0.0;
    Duration jitter{0};         // uniform in [-jitter, +jitter]
    double reorder_probability = 0.0;
    std::uint64_t seed = 0;
    Duration base_latency{0};

    /// Throws InvalidArgument for probabilities outside [0,1] or negative jitter.
    void validate() const;
};

struct Delivery {
    Duration time{0};
    Bytes payload;

    bool operator==(const Delivery&) const = default;
};

/// Deterministic in-process channel running on caller-supplied virtual time.
class Channel {
public:
    explicit Channel(const ChannelSpec& spec);

    /// Schedules one datagram. Returns the deliveries it produced: none when
    /// dropped, otherwise one. A datagram chosen for reordering is held until
    /// the next transmit and then delivered just after it, so its returned
    /// time is provisional.
    std::vector<Delivery> transmit(ByteView datagram, Duration send_time);

    /// Removes and returns everything due at or before `until`, ordered by
    /// delivery time (ties in send order). A held datagram stays queued.
    std::vector<Delivery> drain(Duration until);

    /// Everything still queued, regardless of time, held datagram included.
    std::vector<Delivery> drain_all();

    std::uint64_t transmitted() const { return transmitted_; }
    std::uint64_t dropped() const { return dropped_; }
    std::uint64_t reordered() const { return reordered_; }
    std::size_t in_flight() const { return queue_.size(); }

private:
    using Key = std::pair<Duration, std::uint64_t>;

    ChannelSpec spec_;
    Pcg32 rng_;
    std::map<Key, Bytes> queue_;
    std::optional<Key> held_;
    std::uint64_t sequence_ = 0;
    std::uint64_t transmitted_ = 0;
    std::uint64_t dropped_ = 0;
    std::uint64_t reordered_ = 0;
};

} // namespace redsv::netsim
