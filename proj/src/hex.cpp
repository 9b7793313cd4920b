#include "redsv/hex.hpp"

#include "redsv/error.hpp"

#include <cctype>

namespace redsv {

namespace {

constexpr char kDigits[] = "0123456789abcdef";

int nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

} // namespace

std::string to_hex(ByteView octets, std::string_view sep) {
    std::string out;
    out.reserve(octets.size() * (2 + sep.size()));
    for (std::size_t i = 0; i < octets.size(); ++i) {
        if (i != 0) out += sep;
        out += kDigits[octets[i] >> 4];
        out += kDigits[octets[i] & 0x0F];
    }
    return out;
}

std::string hex_value(std::uint64_t value, int digits) {
    std::string out = "0x";
    for (int i = digits - 1; i >= 0; --i) out += kDigits[(value >> (i * 4)) & 0x0F];
    return out;
}

Bytes parse_hex(std::string_view text) {
    Bytes out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t end = i;
        while (end < text.size() && !std::isspace(static_cast<unsigned char>(text[end]))) ++end;
        std::string_view token = text.substr(i, end - i);
        i = end;
        if (token.empty()) continue;
        if (token.size() > 2 && token[0] == '0' && (token[1] == 'x' || token[1] == 'X')) token.remove_prefix(2);
        if (token.size() % 2 != 0) {
            throw SvError(ErrorCode::InvalidArgument, "odd number of hex digits in '" + std::string(token) + "'");
        }
        for (std::size_t k = 0; k < token.size(); k += 2) {
            const int hi = nibble(token[k]);
            const int lo = nibble(token[k + 1]);
            if (hi < 0 || lo < 0) {
                throw SvError(ErrorCode::InvalidArgument, "bad hex token '" + std::string(token) + "'");
            }
            out.push_back(static_cast<std::uint8_t>((hi << 4) | lo));
        }
    }
    return out;
}

} // namespace redsv
