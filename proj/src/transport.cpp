#include "redsv/transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#ifdef __linux__
#include <sys/prctl.h>
#endif
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>
#include <sstream>
#include <thread>

namespace redsv::transport {

std::string_view to_string(Mode mode) { return mode == Mode::Unicast ? "unicast" : "multicast"; }

Mode parse_mode(std::string_view text) {
    if (text == "unicast") return Mode::Unicast;
    if (text == "multicast") return Mode::Multicast;
    throw SvError(ErrorCode::InvalidArgument, "mode must be unicast or multicast, got '" + std::string(text) + "'");
}

namespace {

in_addr parse_ipv4(const std::string& text) {
    in_addr addr{};
    if (inet_pton(AF_INET, text.c_str(), &addr) != 1) {
        throw SvError(ErrorCode::InvalidArgument, "not an IPv4 address: '" + text + "'");
    }
    return addr;
}

bool is_multicast(in_addr addr) { return (ntohl(addr.s_addr) & 0xF0000000u) == 0xE0000000u; }

[[noreturn]] void fail(const std::string& what) {
    throw SvError(ErrorCode::TransportError, what + ": " + std::strerror(errno));
}

int open_udp() {
    const int fd = ::socket(AF_INET, SOCK_DGRAM | SOCK_CLOEXEC, 0);
    if (fd < 0) fail("socket");
    return fd;
}

} // namespace

void EndpointConfig::validate() const {
    const in_addr addr = parse_ipv4(address);
    if (mode == Mode::Multicast && !is_multicast(addr)) {
        throw SvError(ErrorCode::InvalidArgument, "multicast address " + address + " is outside 224.0.0.0/4");
    }
    if (bind_interface) parse_ipv4(*bind_interface);
}

// ---------------------------------------------------------------------------

UdpSender::UdpSender(const EndpointConfig& cfg) {
    cfg.validate();
    fd_ = open_udp();
    try {
        if (cfg.bind_interface) {
            const in_addr local = parse_ipv4(*cfg.bind_interface);
            if (cfg.mode == Mode::Multicast) {
                if (::setsockopt(fd_, IPPROTO_IP, IP_MULTICAST_IF, &local, sizeof(local)) != 0) fail("IP_MULTICAST_IF");
            } else {
                sockaddr_in sa{};
                sa.sin_family = AF_INET;
                sa.sin_addr = local;
                if (::bind(fd_, reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) != 0) fail("bind " + *cfg.bind_interface);
            }
        }
        if (cfg.mode == Mode::Multicast) {
            const unsigned char ttl = cfg.multicast_ttl;
            if (::setsockopt(fd_, IPPROTO_IP, IP_MULTICAST_TTL, &ttl, sizeof(ttl)) != 0) fail("IP_MULTICAST_TTL");
            const unsigned char loop = 1;
            if (::setsockopt(fd_, IPPROTO_IP, IP_MULTICAST_LOOP, &loop, sizeof(loop)) != 0) fail("IP_MULTICAST_LOOP");
        }
    } catch (...) {
        close();
        throw;
    }
    sockaddr_in dest{};
    dest.sin_family = AF_INET;
    dest.sin_port = htons(cfg.port);
    dest.sin_addr = parse_ipv4(cfg.address);
    dest_.resize(sizeof(dest));
    std::memcpy(dest_.data(), &dest, sizeof(dest));
}

UdpSender::~UdpSender() { close(); }

UdpSender::UdpSender(UdpSender&& other) noexcept : fd_(other.fd_), dest_(std::move(other.dest_)) { other.fd_ = -1; }

UdpSender& UdpSender::operator=(UdpSender&& other) noexcept {
    if (this != &other) {
        close();
        fd_ = other.fd_;
        dest_ = std::move(other.dest_);
        other.fd_ = -1;
    }
    return *this;
}

void UdpSender::close() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
}

void UdpSender::send(ByteView datagram) {
    if (fd_ < 0) throw SvError(ErrorCode::TransportError, "send on a closed socket");
    for (;;) {
        const ssize_t n = ::sendto(fd_, datagram.data(), datagram.size(), 0,
                                   reinterpret_cast<const sockaddr*>(dest_.data()), sizeof(sockaddr_in));
        if (n == static_cast<ssize_t>(datagram.size())) return;
        if (n < 0 && errno == EINTR) continue;
        if (n < 0) fail("sendto");
        throw SvError(ErrorCode::TransportError, "short datagram write");
    }
}

// ---------------------------------------------------------------------------

UdpReceiver::UdpReceiver(const EndpointConfig& cfg) {
    cfg.validate();
    fd_ = open_udp();
    try {
        const int rcvbuf = 1 << 20;
        ::setsockopt(fd_, SOL_SOCKET, SO_RCVBUF, &rcvbuf, sizeof(rcvbuf));

        sockaddr_in sa{};
        sa.sin_family = AF_INET;
        sa.sin_port = htons(cfg.port);
        const in_addr addr = parse_ipv4(cfg.address);
        if (cfg.mode == Mode::Multicast) {
            // Several subscribers may share one group and port.
            const int on = 1;
            if (::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &on, sizeof(on)) != 0) fail("SO_REUSEADDR");
            sa.sin_addr = addr;
        } else {
            sa.sin_addr = addr;
        }
        if (::bind(fd_, reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) != 0) {
            fail("bind " + cfg.address + ":" + std::to_string(cfg.port));
        }
        if (cfg.mode == Mode::Multicast) {
            ip_mreq mreq{};
            mreq.imr_multiaddr = addr;
            mreq.imr_interface.s_addr = cfg.bind_interface ? parse_ipv4(*cfg.bind_interface).s_addr : htonl(INADDR_ANY);
            if (::setsockopt(fd_, IPPROTO_IP, IP_ADD_MEMBERSHIP, &mreq, sizeof(mreq)) != 0) {
                fail("join " + cfg.address);
            }
        }
    } catch (...) {
        ::close(fd_);
        fd_ = -1;
        throw;
    }
}

UdpReceiver::~UdpReceiver() {
    if (fd_ >= 0) ::close(fd_);
}

UdpReceiver::UdpReceiver(UdpReceiver&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }

UdpReceiver& UdpReceiver::operator=(UdpReceiver&& other) noexcept {
    if (this != &other) {
        if (fd_ >= 0) ::close(fd_);
        fd_ = other.fd_;
        other.fd_ = -1;
    }
    return *this;
}

std::uint16_t UdpReceiver::local_port() const {
    sockaddr_in sa{};
    socklen_t len = sizeof(sa);
    if (::getsockname(fd_, reinterpret_cast<sockaddr*>(&sa), &len) != 0) fail("getsockname");
    return ntohs(sa.sin_port);
}

std::optional<std::size_t> UdpReceiver::receive(std::span<std::uint8_t> buffer, Duration timeout) {
    pollfd pfd{fd_, POLLIN, 0};
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(timeout).count();
    const int ready = ::poll(&pfd, 1, static_cast<int>(ms));
    if (ready < 0) {
        if (errno == EINTR) return std::nullopt;
        fail("poll");
    }
    if (ready == 0) return std::nullopt;
    const ssize_t n = ::recv(fd_, buffer.data(), buffer.size(), 0);
    if (n < 0) {
        if (errno == EINTR || errno == EAGAIN) return std::nullopt;
        fail("recv");
    }
    return static_cast<std::size_t>(n);
}

// ---------------------------------------------------------------------------

std::string render(const PublisherState& s) {
    std::ostringstream os;
    os << "frames_sent           " << s.frames_sent << '\n'
       << "ticks                 " << s.ticks << '\n'
       << "deadline_misses       " << s.deadline_misses << '\n'
       << "next_smp_cnt          " << s.smp_cnt << '\n'
       << "wrap_modulus          " << s.wrap_modulus << '\n'
       << "elapsed               " << std::chrono::duration<double>(s.elapsed).count() << " s\n"
       << "mean_send_interval    " << s.mean_send_interval_us << " us\n";
    if (s.error) os << "error                 " << s.error_message << '\n';
    return os.str();
}

namespace {

struct Tick {
    Bytes frame;
    Clock::time_point release;   // earliest send time
    Clock::time_point deadline;  // send must complete by this time
};

} // namespace

PublisherState publish_stream(UdpSender& sender, const SvFrame& frame_template, const DatasetSchema& schema,
                              const SampleProvider& source, const PublishOptions& options) {
    if (!(options.rate_hz > 0.0)) throw SvError(ErrorCode::InvalidArgument, "publish rate must be positive");
    if (options.wrap_modulus == 0 || options.wrap_modulus > 65536) {
        throw SvError(ErrorCode::InvalidArgument, "wrap modulus must lie in [1, 65536]");
    }
    if (options.initial_smp_cnt >= options.wrap_modulus) {
        throw SvError(ErrorCode::InvalidArgument, "initial smpCnt outside the wrap modulus");
    }
    if (frame_template.apdu.asdus.empty()) throw SvError(ErrorCode::InvalidArgument, "template has no ASDU");

    PublisherState state;
    state.wrap_modulus = options.wrap_modulus;
    state.smp_cnt = options.initial_smp_cnt;

    const double period_ns = 1e9 / options.rate_hz;
    std::mutex mu;
    std::condition_variable cv;
    std::deque<Tick> queue;
    bool producer_done = false;
    std::atomic<bool> abort{false};
    std::optional<SvError> producer_error;

    const auto t0 = Clock::now();
    const auto wall0 = std::chrono::system_clock::now().time_since_epoch();
    auto deadline_of = [&](std::uint64_t k) {
        return t0 + std::chrono::duration_cast<Clock::duration>(
                        std::chrono::duration<double, std::nano>(period_ns * static_cast<double>(k)));
    };
    auto stop_requested = [&] {
        return abort.load(std::memory_order_relaxed) ||
               (options.stop != nullptr && options.stop->load(std::memory_order_relaxed));
    };

    // Producer: builds frame k ahead of time, releases it at t0 + k * period.
    std::thread producer([&] {
        SvFrame frame = frame_template;
        std::uint32_t counter = options.initial_smp_cnt;
        std::uint64_t sample_index = 0;
        try {
            for (std::uint64_t k = 0; k < options.frame_count && !stop_requested(); ++k) {
                const auto release = deadline_of(k);
                const auto stamp = UtcTimestamp::from_nanoseconds(
                    std::chrono::duration_cast<std::chrono::nanoseconds>(wall0) +
                        std::chrono::duration_cast<std::chrono::nanoseconds>(release - t0),
                    frame_template.apdu.asdus.front().refr_tm.time_quality);
                for (auto& asdu : frame.apdu.asdus) {
                    asdu.smp_cnt = static_cast<std::uint16_t>(counter);
                    asdu.refr_tm = stamp;
                    const auto values = source(sample_index++);
                    asdu.seq_data = pack_seq_data(values, schema);
                    counter = (counter + 1) % options.wrap_modulus;
                }
                Tick tick{encode_frame(frame, schema), release, deadline_of(k + 1)};
                // Hand over one period early so the sender's own timed wait
                // is the only wakeup on the critical path.
                if (k > 0) std::this_thread::sleep_until(deadline_of(k - 1));
                {
                    std::lock_guard lock(mu);
                    if (queue.size() >= 2) {
                        queue.pop_front();
                        ++state.deadline_misses;
                    }
                    queue.push_back(std::move(tick));
                    ++state.ticks;
                    state.smp_cnt = static_cast<std::uint16_t>(counter);
                }
                cv.notify_one();
            }
        } catch (const SvError& e) {
            std::lock_guard lock(mu);
            producer_error = e;
        }
        {
            std::lock_guard lock(mu);
            producer_done = true;
        }
        cv.notify_one();
    });

#ifdef __linux__
    // Default 50 us timer slack is a fifth of a 4 kHz period.
    const auto old_slack = ::prctl(PR_GET_TIMERSLACK, 0, 0, 0, 0);
    ::prctl(PR_SET_TIMERSLACK, 1UL, 0, 0, 0);
#endif
    std::optional<Clock::time_point> first_send;
    Clock::time_point last_send{};
    for (;;) {
        Tick tick;
        {
            std::unique_lock lock(mu);
            cv.wait(lock, [&] { return !queue.empty() || producer_done; });
            if (queue.empty()) break;
            tick = std::move(queue.front());
            queue.pop_front();
        }
        std::this_thread::sleep_until(tick.release);
        try {
            sender.send(tick.frame);
        } catch (const SvError& e) {
            abort = true;
            state.error = e.code();
            state.error_message = e.what();
            break;
        }
        const auto done = Clock::now();
        if (!first_send) first_send = done;
        last_send = done;
        if (options.on_sent) options.on_sent(tick.frame);
        std::lock_guard lock(mu);
        ++state.frames_sent;
        if (done > tick.deadline) ++state.deadline_misses;
    }
    producer.join();
#ifdef __linux__
    if (old_slack > 0) ::prctl(PR_SET_TIMERSLACK, static_cast<unsigned long>(old_slack), 0, 0, 0);
#endif

    if (producer_error && !state.error) {
        state.error = producer_error->code();
        state.error_message = producer_error->what();
    }
    state.elapsed = std::chrono::duration_cast<Duration>(Clock::now() - t0);
    if (state.frames_sent > 1) {
        state.mean_send_interval_us = std::chrono::duration<double, std::micro>(last_send - *first_send).count() /
                                      static_cast<double>(state.frames_sent - 1);
    }
    return state;
}

PublisherState publish_stream(const EndpointConfig& cfg, const SvFrame& frame_template, const DatasetSchema& schema,
                              const SampleProvider& source, const PublishOptions& options) {
    UdpSender sender(cfg);
    return publish_stream(sender, frame_template, schema, source, options);
}

ReceiveSummary subscribe(UdpReceiver& receiver, const FrameSink& sink, const StopCondition& stop, Duration poll) {
    ReceiveSummary summary;
    std::vector<std::uint8_t> buffer(65536);
    while (!stop()) {
        const auto n = receiver.receive(buffer, poll);
        if (!n) continue;
        const auto arrival = Clock::now();
        ++summary.datagrams;
        if (!sink(ByteView(buffer.data(), *n), arrival)) ++summary.decode_failures;
    }
    return summary;
}

ReceiveSummary subscribe(const EndpointConfig& cfg, const FrameSink& sink, const StopCondition& stop,
                         Duration poll) {
    UdpReceiver receiver(cfg);
    return subscribe(receiver, sink, stop, poll);
}

} // namespace redsv::transport
