#include "redsv/source_sim.hpp"

#include "redsv/budget.hpp"
#include "redsv/error.hpp"
#include "redsv/pcg.hpp"

#include <cmath>
#include <numbers>

namespace redsv::sim {

std::string_view to_string(WaveKind kind) {
    switch (kind) {
        case WaveKind::Sine: return "sine";
        case WaveKind::Constant: return "constant";
        case WaveKind::GaussianNoise: return "noise";
    }
    return "?";
}

WaveKind parse_wave_kind(std::string_view text) {
    if (text == "sine") return WaveKind::Sine;
    if (text == "constant") return WaveKind::Constant;
    if (text == "noise") return WaveKind::GaussianNoise;
    throw SvError(ErrorCode::InvalidArgument, "unknown waveform '" + std::string(text) + "'");
}

Quality QualityProfile::at(std::uint64_t tick) const {
    if (invalid_every != 0 && (tick + 1) % invalid_every == 0) return {Validity::Invalid, false};
    return {};
}

void ChannelSpec::validate() const {
    lookup_logic_node(logic_node);
    if (!(amplitude >= 0.0)) throw SvError(ErrorCode::InvalidArgument, "negative amplitude");
    if (!(noise_sigma >= 0.0)) throw SvError(ErrorCode::InvalidArgument, "negative noise sigma");
    if (width != 2 && width != 4) throw SvError(ErrorCode::BadWidth, "channel width must be 2 or 4");
}

std::chrono::nanoseconds VirtualClock::at(std::uint64_t tick, std::uint32_t points_per_period) const {
    const std::uint64_t sps = static_cast<std::uint64_t>(nominal_hz) * points_per_period;
    // Whole seconds first so the nanosecond product cannot overflow.
    const std::uint64_t secs = tick / sps;
    const std::uint64_t rem = tick % sps;
    return t0 + std::chrono::seconds(secs) + std::chrono::nanoseconds(rem * 1'000'000'000 / sps);
}

double engineering_at(const ChannelSpec& spec, std::uint64_t tick, std::uint32_t points_per_period,
                      std::uint64_t seed, std::uint32_t nominal_hz) {
    switch (spec.kind) {
        case WaveKind::Constant:
            return spec.dc_offset;
        case WaveKind::Sine: {
            // Cycles elapsed, reduced to [0, 1) before scaling by 2*pi to keep
            // long runs as accurate as the first period.
            const double sps = static_cast<double>(nominal_hz) * points_per_period;
            const double cycles = std::fmod(spec.frequency_hz * static_cast<double>(tick), sps) / sps;
            return spec.dc_offset + spec.amplitude * std::sin(2.0 * std::numbers::pi * cycles + spec.phase_rad);
        }
        case WaveKind::GaussianNoise: {
            Pcg32 rng(seed, tick);
            return spec.dc_offset + spec.noise_sigma * rng.normal();
        }
    }
    return 0.0;
}

SampleRecord sample_at(const ChannelSpec& spec, std::uint64_t tick, std::uint32_t points_per_period,
                       std::uint64_t seed, const VirtualClock& clock) {
    if (!budget::supported_points_per_period(points_per_period)) {
        throw SvError(ErrorCode::UnsupportedRate, std::to_string(points_per_period) + " points per period");
    }
    const double eng = engineering_at(spec, tick, points_per_period, seed, clock.nominal_hz);
    const std::int64_t raw = from_engineering(eng, spec.scale_factor, spec.offset, spec.width);
    SampleRecord rec;
    rec.tick_index = tick;
    rec.raw = ScaledValue{static_cast<std::int32_t>(raw), spec.offset, spec.scale_factor};
    rec.quality = spec.quality_profile.at(tick);
    rec.timestamp = UtcTimestamp::from_nanoseconds(clock.at(tick, points_per_period));
    return rec;
}

std::vector<MemberValue> member_values(std::span<const ChannelSpec> channels, const DatasetSchema& schema,
                                       std::uint64_t tick, std::uint32_t points_per_period, std::uint64_t seed,
                                       std::uint32_t nominal_hz) {
    if (channels.size() != schema.members.size()) {
        throw SvError(ErrorCode::CountMismatch, std::to_string(channels.size()) + " channels for " +
                                                    std::to_string(schema.members.size()) + " members");
    }
    std::vector<MemberValue> values;
    values.reserve(channels.size());
    const VirtualClock clock{std::chrono::nanoseconds{0}, nominal_hz};
    for (std::size_t i = 0; i < channels.size(); ++i) {
        // Distinct noise stream per channel.
        ChannelSpec spec = channels[i];
        spec.scale_factor = schema.members[i].scale_factor;
        spec.offset = schema.members[i].offset;
        spec.width = schema.members[i].width;
        const SampleRecord rec = sample_at(spec, tick, points_per_period, seed + i * 0x9E3779B97F4A7C15ULL, clock);
        MemberValue v{rec.raw.raw_i, std::nullopt};
        if (schema.members[i].include_quality) v.quality = rec.quality;
        values.push_back(v);
    }
    return values;
}

} // namespace redsv::sim
