#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace redsv {

enum class ErrorCode {
    OversizeValue,
    Truncated,
    UnsupportedLength,
    Overflow,
    BadWidth,
    UnknownLogicNode,
    OutOfRange,
    SchemaMismatch,
    CountMismatch,
    WidthMismatch,
    BadEtherType,
    LengthMismatch,
    BadReserved,
    UnknownTag,
    MissingField,
    UnsupportedRate,
    TransportError,
    InvalidArgument,
    ConfigError,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries one of the codes above so
// callers can branch on the kind without parsing messages.
class SvError : public std::runtime_error {
public:
    SvError(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace redsv
