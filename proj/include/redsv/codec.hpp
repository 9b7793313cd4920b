#pragma once

#include "redsv/ber.hpp"
#include "redsv/model.hpp"

#include <array>
#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace redsv {

using MacAddress = std::array<std::uint8_t, 6>;

/// Parses "aa:bb:cc:dd:ee:ff" (also accepts '-' separators).
MacAddress parse_mac(std::string_view text);
std::string to_string(const MacAddress& mac);

inline constexpr std::uint16_t kVlanTpid = 0x8100;
inline constexpr std::uint16_t kSvEtherType = 0x88BA;
/// APPID + Length + Reserved1 + Reserved2.
inline constexpr std::size_t kApduHeaderLength = 8;
/// Destination, source, 802.1Q tag and EtherType.
inline constexpr std::size_t kLinkHeaderLength = 18;

namespace tags {
inline constexpr std::uint8_t kSavPdu = 0x60;
inline constexpr std::uint8_t kNoAsdu = 0x80;
inline constexpr std::uint8_t kSeqAsdu = 0xA2;
inline constexpr std::uint8_t kAsdu = 0x30;
inline constexpr std::uint8_t kSvId = 0x80;
inline constexpr std::uint8_t kSmpCnt = 0x82;
inline constexpr std::uint8_t kConfRev = 0x83;
inline constexpr std::uint8_t kRefrTm = 0x84;
inline constexpr std::uint8_t kSmpSynch = 0x85;
inline constexpr std::uint8_t kSeqData = 0x87;
} // namespace tags

struct VlanTag {
    std::uint8_t priority = 0;  // 3 bits
    bool dei = false;
    std::uint16_t vid = 0;      // 12 bits

    std::uint16_t tci() const;
    static VlanTag from_tci(std::uint16_t tci);

    bool operator==(const VlanTag&) const = default;
};

/// 8-octet UTC time: seconds since the epoch, 24-bit binary fraction and a
/// time-quality octet.
struct UtcTimestamp {
    std::uint32_t seconds = 0;
    std::uint32_t fraction = 0;  // 24 bits
    std::uint8_t time_quality = 0;

    static UtcTimestamp from_nanoseconds(std::chrono::nanoseconds since_epoch, std::uint8_t quality = 0);
    std::chrono::nanoseconds to_nanoseconds() const;
    std::string to_string() const;

    bool operator==(const UtcTimestamp&) const = default;
};

enum class SmpSynch : std::uint8_t { None = 0, Local = 1, Global = 2 };

std::string_view to_string(SmpSynch s);

struct Asdu {
    std::string sv_id;
    std::uint16_t smp_cnt = 0;
    std::uint32_t conf_rev = 0;
    UtcTimestamp refr_tm;
    SmpSynch smp_synch = SmpSynch::None;
    Bytes seq_data;

    bool operator==(const Asdu&) const = default;
};

struct SavApdu {
    std::vector<Asdu> asdus;

    bool operator==(const SavApdu&) const = default;
};

struct SvFrame {
    MacAddress dst_mac{};
    MacAddress src_mac{};
    VlanTag vlan;
    std::uint16_t appid = 0;
    SavApdu apdu;

    bool operator==(const SvFrame&) const = default;
};

/// Encodes the savPdu TLV alone (tag 0x60 onward).
Bytes encode_apdu(const SavApdu& apdu, const DatasetSchema& schema);

/// Full link-level frame. Every BER length is computed from content and the
/// Length field covers APPID through the end of the savPdu.
Bytes encode_frame(const SvFrame& frame, const DatasetSchema& schema);

enum class DecodeMode { Strict, Lenient };

struct DecodedFrame {
    SvFrame frame;
    /// Deviations tolerated in lenient mode; always empty in strict mode.
    std::vector<std::string> warnings;
};

DecodedFrame decode_frame(ByteView octets, DecodeMode mode = DecodeMode::Strict);

/// One dataset value as carried in seqData.
struct MemberValue {
    std::int64_t raw = 0;
    std::optional<Quality> quality;

    bool operator==(const MemberValue&) const = default;
};

/// Concatenates the members big-endian in schema order. A member with a
/// quality slot and no quality given is encoded Good.
Bytes pack_seq_data(std::span<const MemberValue> values, const DatasetSchema& schema);
std::vector<MemberValue> unpack_seq_data(ByteView octets, const DatasetSchema& schema);

struct DissectLine {
    int depth = 0;
    std::string field;
    std::string raw_hex;
    std::string value;
    /// Warnings and truncation markers; `field` is empty for these.
    bool annotation = false;
};

/// Best-effort, never-throwing rendering of a captured frame in wire order.
std::vector<DissectLine> dissect(ByteView octets);
/// As above, additionally breaking seqData into the schema's members.
std::vector<DissectLine> dissect(ByteView octets, const DatasetSchema& schema);

/// Two spaces per depth level; `show_raw` appends the octets in brackets.
std::string render_dissection(const std::vector<DissectLine>& lines, bool show_raw = false);

} // namespace redsv
