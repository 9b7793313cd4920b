#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace redsv {

/// Exact decimal number: mantissa * 10^exponent.
///
/// Engineering values never pass through binary floating point on the
/// exact path; equality compares numeric value, so 1.50 == 1.5.
struct Decimal {
    std::int64_t mantissa = 0;
    int exponent = 0;

    /// Strips trailing zeros from the mantissa (0 normalizes to 0e0).
    Decimal normalized() const;

    /// Plain positional rendering without exponent, e.g. "999.9", "-0.0012".
    std::string to_string() const;
    double to_double() const;

    /// Accepts "[-+]digits[.digits][e[-+]digits]".
    static Decimal parse(std::string_view text);
    /// Shortest round-tripping decimal form of `value`.
    static Decimal from_double(double value);

    friend bool operator==(const Decimal& a, const Decimal& b);
};

/// Transmitted integer sample with its scaling attributes.
/// engineering = (raw_i + offset) * 10^scale_factor
struct ScaledValue {
    std::int32_t raw_i = 0;
    std::int32_t offset = 0;
    std::int8_t scale_factor = 0;

    bool operator==(const ScaledValue&) const = default;
};

Decimal to_engineering(const ScaledValue& v);

/// Inverse scaling: round(x * 10^-scale_factor) - offset with ties to even.
/// Throws Overflow when the result does not fit `width` octets.
std::int64_t from_engineering(const Decimal& x, std::int8_t scale_factor, std::int32_t offset,
                              std::size_t width, bool is_signed = true);
/// Same, for waveform sources: `x` is first converted to its shortest
/// decimal representation so 22.505 quantizes like the literal "22.505".
std::int64_t from_engineering(double x, std::int8_t scale_factor, std::int32_t offset,
                              std::size_t width, bool is_signed = true);

enum class Validity : std::uint8_t { Good = 0, Invalid = 1, Questionable = 2 };

struct Quality {
    Validity validity = Validity::Good;
    bool test = false;

    bool operator==(const Quality&) const = default;
};

std::string_view to_string(Validity v);

// Two octets; low bits of the second octet: bits 0-1 validity, bit 2 test.
std::array<std::uint8_t, 2> encode_quality(const Quality& q);
/// Throws InvalidArgument on reserved bit patterns.
Quality decode_quality(std::span<const std::uint8_t> octets);

/// Geographic position. Ranges are enforced on construction.
class GeoCoordinate {
public:
    static constexpr std::int32_t kMaxB = 180'000'000;
    static constexpr std::int32_t kMaxL = 90'000'000;
    static constexpr std::int16_t kMaxH = 9999;
    static constexpr std::uint16_t kMinDop = 5;
    static constexpr std::uint16_t kMaxDop = 999;
    static constexpr std::int8_t kAngleScale = -4;
    static constexpr std::int8_t kMetricScale = -1;

    GeoCoordinate(std::int32_t b_raw, std::int32_t l_raw, std::int16_t h_raw,
                  std::uint16_t pdop = kMinDop, std::uint16_t hdop = kMinDop, std::uint16_t vdop = kMinDop);

    std::int32_t b_raw() const { return b_; }
    std::int32_t l_raw() const { return l_; }
    std::int16_t h_raw() const { return h_; }
    std::uint16_t pdop() const { return pdop_; }
    std::uint16_t hdop() const { return hdop_; }
    std::uint16_t vdop() const { return vdop_; }

    Decimal latitude() const { return to_engineering({b_, 0, kAngleScale}); }
    Decimal longitude() const { return to_engineering({l_, 0, kAngleScale}); }
    Decimal height() const { return to_engineering({h_, 0, kMetricScale}); }

    bool operator==(const GeoCoordinate&) const = default;

private:
    std::int32_t b_;
    std::int32_t l_;
    std::int16_t h_;
    std::uint16_t pdop_;
    std::uint16_t hdop_;
    std::uint16_t vdop_;
};

/// Local rectangular position; the DOP fields are range checked.
class RectCoordinate {
public:
    RectCoordinate(std::int16_t x_raw, std::int16_t y_raw, std::int16_t z_raw, std::int8_t scale_factor,
                   std::int16_t offset, std::uint16_t pdop = GeoCoordinate::kMinDop,
                   std::uint16_t xdop = GeoCoordinate::kMinDop, std::uint16_t ydop = GeoCoordinate::kMinDop,
                   std::uint16_t zdop = GeoCoordinate::kMinDop);

    std::int16_t x_raw() const { return x_; }
    std::int16_t y_raw() const { return y_; }
    std::int16_t z_raw() const { return z_; }
    std::int8_t scale_factor() const { return scale_factor_; }
    std::int16_t offset() const { return offset_; }
    std::uint16_t pdop() const { return pdop_; }
    std::uint16_t xdop() const { return xdop_; }
    std::uint16_t ydop() const { return ydop_; }
    std::uint16_t zdop() const { return zdop_; }

    Decimal x() const { return to_engineering({x_, offset_, scale_factor_}); }
    Decimal y() const { return to_engineering({y_, offset_, scale_factor_}); }
    Decimal z() const { return to_engineering({z_, offset_, scale_factor_}); }

    bool operator==(const RectCoordinate&) const = default;

private:
    std::int16_t x_;
    std::int16_t y_;
    std::int16_t z_;
    std::int8_t scale_factor_;
    std::int16_t offset_;
    std::uint16_t pdop_;
    std::uint16_t xdop_;
    std::uint16_t ydop_;
    std::uint16_t zdop_;
};

struct LogicNodeDescriptor {
    std::string_view ln_name;
    std::string_view description;
    std::string_view measurement_do;
    std::string_view cdc = "SAV";

    bool operator==(const LogicNodeDescriptor&) const = default;
};

/// The fixed registry of measurement logic nodes.
std::span<const LogicNodeDescriptor> logic_nodes();
/// Case-sensitive lookup; throws UnknownLogicNode.
const LogicNodeDescriptor& lookup_logic_node(std::string_view name);

struct DatasetMember {
    std::string name;  // dotted path, e.g. "TMGF1.MagFld.intMag.i"
    std::size_t width = 4;
    bool is_signed = true;
    std::int8_t scale_factor = 0;
    std::int32_t offset = 0;
    bool include_quality = false;

    /// Octets this member occupies in seqData.
    std::size_t packed_width() const { return width + (include_quality ? 2 : 0); }

    bool operator==(const DatasetMember&) const = default;
};

/// Ordered seqData layout.
struct DatasetSchema {
    std::vector<DatasetMember> members;

    std::size_t packed_width() const;

    /// Distinct top-level data attributes: each member name minus its last
    /// path component, so intMag.i and GeoCrd.{B,L,H} count as two.
    std::size_t top_level_attribute_count() const;

    /// Throws BadWidth / InvalidArgument for malformed members.
    void validate() const;

    bool operator==(const DatasetSchema&) const = default;
};

/// intMag plus the GeoCrd B/L/H triple: the 14-octet reference dataset.
DatasetSchema reference_schema(std::string_view prefix = "TMGF1.MagFld");

} // namespace redsv
