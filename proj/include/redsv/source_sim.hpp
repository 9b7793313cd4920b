#pragma once

#include "redsv/codec.hpp"
#include "redsv/model.hpp"

#include <chrono>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace redsv::sim {

enum class WaveKind { Sine, Constant, GaussianNoise };

std::string_view to_string(WaveKind kind);
WaveKind parse_wave_kind(std::string_view text);

/// Every sample Good, or every n-th tick (ticks n-1, 2n-1, ...) Invalid.
struct QualityProfile {
    std::uint32_t invalid_every = 0;  // 0: always good

    static QualityProfile always_good() { return {}; }
    static QualityProfile invalid_every_nth(std::uint32_t n) { return {n}; }

    Quality at(std::uint64_t tick) const;
    bool operator==(const QualityProfile&) const = default;
};

/// One simulated transducer channel, in engineering units.
struct ChannelSpec {
    std::string logic_node = "TMGF";
    WaveKind kind = WaveKind::Constant;
    double amplitude = 0.0;
    double frequency_hz = 50.0;
    double phase_rad = 0.0;
    double dc_offset = 0.0;
    double noise_sigma = 0.0;
    std::int8_t scale_factor = 0;
    std::int32_t offset = 0;
    std::size_t width = 4;
    QualityProfile quality_profile;

    /// Checks the logic node name and non-negative amplitude/sigma.
    void validate() const;
    bool operator==(const ChannelSpec&) const = default;
};

/// Simulation time base: tick k happens at t0 + k / (nominal_hz * points).
struct VirtualClock {
    std::chrono::nanoseconds t0{0};
    std::uint32_t nominal_hz = 50;

    std::chrono::nanoseconds at(std::uint64_t tick, std::uint32_t points_per_period) const;
};

struct SampleRecord {
    std::uint64_t tick_index = 0;
    ScaledValue raw;
    Quality quality;
    UtcTimestamp timestamp;

    bool operator==(const SampleRecord&) const = default;
};

/// Engineering value of the waveform before quantization.
double engineering_at(const ChannelSpec& spec, std::uint64_t tick, std::uint32_t points_per_period,
                      std::uint64_t seed, std::uint32_t nominal_hz = 50);

/// Pure function of its arguments. Throws UnsupportedRate for points other
/// than 80/256 and Overflow when the value does not fit the channel width.
SampleRecord sample_at(const ChannelSpec& spec, std::uint64_t tick, std::uint32_t points_per_period,
                       std::uint64_t seed, const VirtualClock& clock = {});

/// Builds the seqData member values for one tick across several channels.
/// Quality is attached only where the schema member carries a quality slot.
std::vector<MemberValue> member_values(std::span<const ChannelSpec> channels, const DatasetSchema& schema,
                                       std::uint64_t tick, std::uint32_t points_per_period, std::uint64_t seed,
                                       std::uint32_t nominal_hz = 50);

} // namespace redsv::sim
