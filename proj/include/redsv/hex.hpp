#pragma once

#include "redsv/ber.hpp"

#include <cstdint>
#include <string>
#include <string_view>

namespace redsv {

/// Lower-case hex, `sep` between octets ("" for a packed string).
std::string to_hex(ByteView octets, std::string_view sep = " ");

/// "0x" followed by `digits` lower-case hex digits.
std::string hex_value(std::uint64_t value, int digits);

/// Parses whitespace-separated hex octets. Tokens may carry a 0x prefix and
/// may hold several octets ("88ba"). Throws InvalidArgument on bad input.
Bytes parse_hex(std::string_view text);

} // namespace redsv
