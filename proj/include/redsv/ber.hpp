#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace redsv {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

} // namespace redsv

namespace redsv::ber {

/// Largest value length expressible with two long-form length octets.
inline constexpr std::size_t kMaxValueLength = 0xFFFF;

struct Tlv {
    std::uint8_t tag = 0;
    Bytes value;

    bool operator==(const Tlv&) const = default;
};

/// Result of reading one TLV out of a larger buffer. `value` aliases the
/// input buffer; `next` is the offset just past the value.
struct TlvView {
    std::uint8_t tag = 0;
    ByteView value;
    std::size_t next = 0;
};

/// Number of octets the definite-form length takes for `value_length`.
std::size_t length_octets(std::size_t value_length);

/// Appends definite-form length octets (short form up to 127).
void append_length(Bytes& out, std::size_t value_length);

void append_tlv(Bytes& out, std::uint8_t tag, ByteView value);
Bytes encode_tlv(std::uint8_t tag, ByteView value);

/// Tag and declared length only; the value may extend past the buffer.
struct TlvHeader {
    std::uint8_t tag = 0;
    std::size_t length = 0;
    std::size_t value_offset = 0;
};

/// Reads tag and length octets at `cursor` without requiring the value to
/// be present. Same error rules as decode_tlv for the header itself.
TlvHeader decode_tlv_header(ByteView buffer, std::size_t cursor);

/// Reads the TLV starting at `cursor`. Throws Truncated when the header or
/// value runs past the buffer and UnsupportedLength on the indefinite form
/// (0x80) or length fields wider than two octets.
TlvView decode_tlv(ByteView buffer, std::size_t cursor);

// Fixed-width big-endian integers. Width must be 1, 2, 4 or 8.
Bytes encode_int_fixed(std::int64_t value, std::size_t width);
Bytes encode_uint_fixed(std::uint64_t value, std::size_t width);
void append_int_fixed(Bytes& out, std::int64_t value, std::size_t width);
void append_uint_fixed(Bytes& out, std::uint64_t value, std::size_t width);

std::int64_t decode_int_fixed(ByteView octets);
std::uint64_t decode_uint_fixed(ByteView octets);

/// Range check helper shared by the packing code.
bool fits_width(std::int64_t value, std::size_t width, bool is_signed);

} // namespace redsv::ber
