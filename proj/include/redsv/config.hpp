#pragma once

#include "redsv/codec.hpp"
#include "redsv/model.hpp"
#include "redsv/source_sim.hpp"
#include "redsv/transport.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace redsv::config {

/// Everything a publisher or subscriber needs, loaded from a `key = value`
/// file. Defaults reproduce the reference merging unit stream.
struct RunConfig {
    std::string sv_id = "xxxxMUnn01";
    std::uint16_t appid = 0x4000;
    std::uint32_t conf_rev = 1;
    MacAddress dst_mac{0x18, 0xcc, 0x18, 0x8a, 0xbc, 0xdb};
    MacAddress src_mac{0xb8, 0x27, 0xeb, 0x47, 0x1f, 0xd7};
    std::uint8_t vlan_priority = 4;
    std::uint16_t vlan_id = 0;
    SmpSynch smp_synch = SmpSynch::None;
    std::uint32_t nominal_hz = 50;
    std::uint32_t points_per_period = 80;
    DatasetSchema schema = reference_schema();
    transport::EndpointConfig endpoint;
    /// One per schema member, in order. Empty means constant zero everywhere.
    std::vector<sim::ChannelSpec> channels;
    std::uint64_t seed = 1;

    std::uint32_t samples_per_second() const { return nominal_hz * points_per_period; }
    std::vector<sim::ChannelSpec> effective_channels() const;
    /// One-ASDU frame carrying the configured header fields and zero data.
    SvFrame frame_template() const;

    bool operator==(const RunConfig&) const = default;
};

/// Parses config text. Throws ConfigError naming `origin` and the line for
/// syntax errors and for values that violate the model or budget rules.
RunConfig parse(std::string_view text, std::string_view origin = "<config>");

/// Reads and parses a file; an unreadable file is a ConfigError too.
RunConfig load(const std::filesystem::path& path);

/// Canonical text that parses back to an equal RunConfig.
std::string dump(const RunConfig& cfg);

} // namespace redsv::config
