#pragma once

#include "redsv/codec.hpp"
#include "redsv/error.hpp"

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace redsv::transport {

using Duration = std::chrono::nanoseconds;
using Clock = std::chrono::steady_clock;

enum class Mode { Unicast, Multicast };

std::string_view to_string(Mode mode);
Mode parse_mode(std::string_view text);

inline constexpr const char* kDefaultGroup = "239.255.61.85";
inline constexpr std::uint16_t kDefaultPort = 61850;

struct EndpointConfig {
    Mode mode = Mode::Multicast;
    std::string address = kDefaultGroup;
    std::uint16_t port = kDefaultPort;
    std::uint8_t multicast_ttl = 1;
    /// Local interface address for binding / multicast egress and joins.
    std::optional<std::string> bind_interface;

    /// Throws InvalidArgument for malformed addresses or a multicast mode
    /// address outside 224.0.0.0/4.
    void validate() const;
    bool operator==(const EndpointConfig&) const = default;
};

/// Owns a UDP socket configured for sending to one endpoint.
class UdpSender {
public:
    explicit UdpSender(const EndpointConfig& cfg);
    ~UdpSender();
    UdpSender(UdpSender&& other) noexcept;
    UdpSender& operator=(UdpSender&& other) noexcept;
    UdpSender(const UdpSender&) = delete;
    UdpSender& operator=(const UdpSender&) = delete;

    /// Throws TransportError when the datagram cannot be handed to the kernel.
    void send(ByteView datagram);
    void close();
    bool is_open() const { return fd_ >= 0; }

private:
    int fd_ = -1;
    std::vector<std::uint8_t> dest_;  // sockaddr_in storage
};

/// Owns a bound UDP socket, joined to the group in multicast mode.
class UdpReceiver {
public:
    /// Throws TransportError on bind or join failure. Port 0 binds an
    /// ephemeral port (see local_port()).
    explicit UdpReceiver(const EndpointConfig& cfg);
    ~UdpReceiver();
    UdpReceiver(UdpReceiver&& other) noexcept;
    UdpReceiver& operator=(UdpReceiver&& other) noexcept;
    UdpReceiver(const UdpReceiver&) = delete;
    UdpReceiver& operator=(const UdpReceiver&) = delete;

    std::uint16_t local_port() const;

    /// Waits up to `timeout`; returns the datagram length or nullopt on timeout.
    std::optional<std::size_t> receive(std::span<std::uint8_t> buffer, Duration timeout);

private:
    int fd_ = -1;
};

struct PublisherState {
    std::uint16_t smp_cnt = 0;  // counter the next ASDU would carry
    std::uint32_t wrap_modulus = 4000;
    std::uint64_t frames_sent = 0;
    std::uint64_t deadline_misses = 0;
    std::uint64_t ticks = 0;  // frames produced, including dropped ones
    Duration elapsed{0};
    double mean_send_interval_us = 0.0;
    std::optional<ErrorCode> error;
    std::string error_message;

    bool ok() const { return !error.has_value(); }
};

std::string render(const PublisherState& state);

/// Values for one ASDU, called with a running sample index starting at 0.
using SampleProvider = std::function<std::vector<MemberValue>(std::uint64_t tick)>;

struct PublishOptions {
    /// Frames per second; ticks are scheduled at absolute deadlines
    /// t0 + k / rate.
    double rate_hz = 4000.0;
    std::uint32_t wrap_modulus = 4000;
    std::uint64_t frame_count = 1;
    std::uint16_t initial_smp_cnt = 0;
    /// Checked every tick; setting it ends the stream early.
    const std::atomic<bool>* stop = nullptr;
    /// Observer of every datagram actually sent (tests, capture files).
    std::function<void(ByteView)> on_sent;
};

/// Paced publisher. A producer activity builds tick k's frame and releases it
/// at its deadline into a two-slot queue; the sending activity drains the
/// queue. A full queue drops the older tick and counts a deadline miss, as
/// does a send completing after the next tick's deadline. Socket failures
/// abort the stream and are reported in the returned state.
PublisherState publish_stream(UdpSender& sender, const SvFrame& frame_template, const DatasetSchema& schema,
                              const SampleProvider& source, const PublishOptions& options);

PublisherState publish_stream(const EndpointConfig& cfg, const SvFrame& frame_template, const DatasetSchema& schema,
                              const SampleProvider& source, const PublishOptions& options);

struct ReceiveSummary {
    std::uint64_t datagrams = 0;
    std::uint64_t decode_failures = 0;
};

/// Receives datagram octets with their arrival time; returns false when it
/// could not decode them.
using FrameSink = std::function<bool(ByteView, Clock::time_point)>;
using StopCondition = std::function<bool()>;

/// Delivers datagrams to `sink` in arrival order until `stop` returns true.
/// `stop` is polled before every wait of at most `poll`.
ReceiveSummary subscribe(UdpReceiver& receiver, const FrameSink& sink, const StopCondition& stop,
                         Duration poll = std::chrono::milliseconds(20));

ReceiveSummary subscribe(const EndpointConfig& cfg, const FrameSink& sink, const StopCondition& stop,
                         Duration poll = std::chrono::milliseconds(20));

} // namespace redsv::transport
