#include "redsv/ber.hpp"

#include "redsv/error.hpp"
#include "redsv/hex.hpp"

#include <limits>
#include <string>

namespace redsv {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::OversizeValue: return "OversizeValue";
        case ErrorCode::Truncated: return "Truncated";
        case ErrorCode::UnsupportedLength: return "UnsupportedLength";
        case ErrorCode::Overflow: return "Overflow";
        case ErrorCode::BadWidth: return "BadWidth";
        case ErrorCode::UnknownLogicNode: return "UnknownLogicNode";
        case ErrorCode::OutOfRange: return "OutOfRange";
        case ErrorCode::SchemaMismatch: return "SchemaMismatch";
        case ErrorCode::CountMismatch: return "CountMismatch";
        case ErrorCode::WidthMismatch: return "WidthMismatch";
        case ErrorCode::BadEtherType: return "BadEtherType";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::BadReserved: return "BadReserved";
        case ErrorCode::UnknownTag: return "UnknownTag";
        case ErrorCode::MissingField: return "MissingField";
        case ErrorCode::UnsupportedRate: return "UnsupportedRate";
        case ErrorCode::TransportError: return "TransportError";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

} // namespace redsv

namespace redsv::ber {

namespace {

void check_width(std::size_t width) {
    if (width != 1 && width != 2 && width != 4 && width != 8) {
        throw SvError(ErrorCode::BadWidth, "unsupported integer width " + std::to_string(width));
    }
}

} // namespace

std::size_t length_octets(std::size_t value_length) {
    if (value_length <= 0x7F) return 1;
    if (value_length <= 0xFF) return 2;
    if (value_length <= kMaxValueLength) return 3;
    throw SvError(ErrorCode::OversizeValue, "value length " + std::to_string(value_length) + " exceeds 65535");
}

void append_length(Bytes& out, std::size_t value_length) {
    switch (length_octets(value_length)) {
        case 1:
            out.push_back(static_cast<std::uint8_t>(value_length));
            break;
        case 2:
            out.push_back(0x81);
            out.push_back(static_cast<std::uint8_t>(value_length));
            break;
        default:
            out.push_back(0x82);
            out.push_back(static_cast<std::uint8_t>(value_length >> 8));
            out.push_back(static_cast<std::uint8_t>(value_length & 0xFF));
            break;
    }
}

void append_tlv(Bytes& out, std::uint8_t tag, ByteView value) {
    out.reserve(out.size() + 1 + length_octets(value.size()) + value.size());
    out.push_back(tag);
    append_length(out, value.size());
    out.insert(out.end(), value.begin(), value.end());
}

Bytes encode_tlv(std::uint8_t tag, ByteView value) {
    Bytes out;
    append_tlv(out, tag, value);
    return out;
}

TlvHeader decode_tlv_header(ByteView buffer, std::size_t cursor) {
    if (cursor >= buffer.size()) {
        throw SvError(ErrorCode::Truncated, "no tag at offset " + std::to_string(cursor));
    }
    TlvHeader h;
    h.tag = buffer[cursor];
    std::size_t pos = cursor + 1;
    if (pos >= buffer.size()) {
        throw SvError(ErrorCode::Truncated, "missing length at offset " + std::to_string(pos));
    }
    const std::uint8_t first = buffer[pos++];
    if (first < 0x80) {
        h.length = first;
    } else if (first == 0x80) {
        throw SvError(ErrorCode::UnsupportedLength, "indefinite length at offset " + std::to_string(pos - 1));
    } else {
        const std::size_t count = first & 0x7F;
        if (count > 2) {
            throw SvError(ErrorCode::UnsupportedLength,
                          std::to_string(count) + " length octets at offset " + std::to_string(pos - 1));
        }
        if (pos + count > buffer.size()) {
            throw SvError(ErrorCode::Truncated, "length octets cut at offset " + std::to_string(buffer.size()));
        }
        for (std::size_t i = 0; i < count; ++i) h.length = (h.length << 8) | buffer[pos++];
    }
    h.value_offset = pos;
    return h;
}

TlvView decode_tlv(ByteView buffer, std::size_t cursor) {
    const TlvHeader h = decode_tlv_header(buffer, cursor);
    if (h.length > buffer.size() - h.value_offset) {
        throw SvError(ErrorCode::Truncated, "value of tag " + hex_value(h.tag, 2) + " needs " +
                                                std::to_string(h.length) + " octets, " +
                                                std::to_string(buffer.size() - h.value_offset) + " remain");
    }
    return TlvView{h.tag, buffer.subspan(h.value_offset, h.length), h.value_offset + h.length};
}

bool fits_width(std::int64_t value, std::size_t width, bool is_signed) {
    check_width(width);
    if (width == 8) return is_signed || value >= 0;
    const int bits = static_cast<int>(width * 8);
    if (is_signed) {
        const std::int64_t lo = -(std::int64_t{1} << (bits - 1));
        const std::int64_t hi = (std::int64_t{1} << (bits - 1)) - 1;
        return value >= lo && value <= hi;
    }
    return value >= 0 && value < (std::int64_t{1} << bits);
}

void append_uint_fixed(Bytes& out, std::uint64_t value, std::size_t width) {
    check_width(width);
    if (width < 8 && (value >> (width * 8)) != 0) {
        throw SvError(ErrorCode::Overflow,
                      std::to_string(value) + " does not fit " + std::to_string(width) + " unsigned octets");
    }
    for (std::size_t i = width; i-- > 0;) out.push_back(static_cast<std::uint8_t>(value >> (i * 8)));
}

void append_int_fixed(Bytes& out, std::int64_t value, std::size_t width) {
    check_width(width);
    if (!fits_width(value, width, true)) {
        throw SvError(ErrorCode::Overflow,
                      std::to_string(value) + " does not fit " + std::to_string(width) + " signed octets");
    }
    const auto bits = static_cast<std::uint64_t>(value);
    for (std::size_t i = width; i-- > 0;) out.push_back(static_cast<std::uint8_t>(bits >> (i * 8)));
}

Bytes encode_int_fixed(std::int64_t value, std::size_t width) {
    Bytes out;
    append_int_fixed(out, value, width);
    return out;
}

Bytes encode_uint_fixed(std::uint64_t value, std::size_t width) {
    Bytes out;
    append_uint_fixed(out, value, width);
    return out;
}

std::uint64_t decode_uint_fixed(ByteView octets) {
    check_width(octets.size());
    std::uint64_t v = 0;
    for (auto b : octets) v = (v << 8) | b;
    return v;
}

std::int64_t decode_int_fixed(ByteView octets) {
    const std::uint64_t raw = decode_uint_fixed(octets);
    const std::size_t bits = octets.size() * 8;
    if (bits == 64) return static_cast<std::int64_t>(raw);
    const std::uint64_t sign = std::uint64_t{1} << (bits - 1);
    if (raw & sign) return static_cast<std::int64_t>(raw | ~((sign << 1) - 1));
    return static_cast<std::int64_t>(raw);
}

} // namespace redsv::ber
