#include "redsv/model.hpp"

#include "redsv/ber.hpp"
#include "redsv/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <set>
#include <string>

namespace redsv {

namespace {

__extension__ typedef __int128 i128;

// 10^n for 0 <= n <= 38 fits in a signed 128-bit integer.
i128 pow10_128(int n) {
    i128 r = 1;
    for (int i = 0; i < n; ++i) r *= 10;
    return r;
}

constexpr int kMaxShift = 38;

} // namespace

Decimal Decimal::normalized() const {
    if (mantissa == 0) return {0, 0};
    Decimal d = *this;
    while (d.mantissa % 10 == 0) {
        d.mantissa /= 10;
        ++d.exponent;
    }
    return d;
}

bool operator==(const Decimal& a, const Decimal& b) {
    const Decimal x = a.normalized();
    const Decimal y = b.normalized();
    return x.mantissa == y.mantissa && x.exponent == y.exponent;
}

std::string Decimal::to_string() const {
    const bool negative = mantissa < 0;
    // Magnitude via unsigned to survive INT64_MIN.
    const std::uint64_t mag = negative ? 0 - static_cast<std::uint64_t>(mantissa) : static_cast<std::uint64_t>(mantissa);
    std::string digits = std::to_string(mag);
    std::string out;
    if (exponent >= 0) {
        out = digits;
        if (mag != 0) out.append(static_cast<std::size_t>(exponent), '0');
    } else {
        const auto frac = static_cast<std::size_t>(-exponent);
        if (digits.size() <= frac) digits.insert(0, frac - digits.size() + 1, '0');
        out = digits.substr(0, digits.size() - frac) + "." + digits.substr(digits.size() - frac);
        while (out.back() == '0') out.pop_back();
        if (out.back() == '.') out.pop_back();
    }
    if (negative && out != "0") out.insert(0, "-");
    return out;
}

double Decimal::to_double() const {
    // strtod on the exact rendering yields the correctly rounded double.
    const std::string text = std::to_string(mantissa) + "e" + std::to_string(exponent);
    return std::strtod(text.c_str(), nullptr);
}

Decimal Decimal::parse(std::string_view text) {
    auto fail = [&] {
        return SvError(ErrorCode::InvalidArgument, "not a decimal number: '" + std::string(text) + "'");
    };
    std::size_t i = 0;
    bool negative = false;
    if (i < text.size() && (text[i] == '-' || text[i] == '+')) negative = text[i++] == '-';
    i128 mant = 0;
    int exponent = 0;
    int digits = 0;
    bool seen_point = false;
    for (; i < text.size(); ++i) {
        const char c = text[i];
        if (c == '.') {
            if (seen_point) throw fail();
            seen_point = true;
            continue;
        }
        if (c < '0' || c > '9') break;
        if (mant == 0 && c == '0') {
            if (seen_point) --exponent;
            ++digits;
            continue;
        }
        mant = mant * 10 + (c - '0');
        if (seen_point) --exponent;
        ++digits;
        if (mant > INT64_MAX) throw SvError(ErrorCode::Overflow, "too many digits in '" + std::string(text) + "'");
    }
    if (digits == 0) throw fail();
    if (i < text.size()) {
        if (text[i] != 'e' && text[i] != 'E') throw fail();
        ++i;
        int e = 0;
        const char* first = text.data() + i;
        const char* last = text.data() + text.size();
        if (first != last && *first == '+') ++first;
        auto [ptr, ec] = std::from_chars(first, last, e);
        if (ec != std::errc{} || ptr != last) throw fail();
        exponent += e;
    }
    const auto m = static_cast<std::int64_t>(mant);
    return Decimal{negative ? -m : m, exponent}.normalized();
}

Decimal Decimal::from_double(double value) {
    if (!std::isfinite(value)) throw SvError(ErrorCode::InvalidArgument, "non-finite engineering value");
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return parse(std::string_view(buf, static_cast<std::size_t>(ptr - buf)));
}

Decimal to_engineering(const ScaledValue& v) {
    return Decimal{static_cast<std::int64_t>(v.raw_i) + v.offset, v.scale_factor}.normalized();
}

std::int64_t from_engineering(const Decimal& x, std::int8_t scale_factor, std::int32_t offset, std::size_t width,
                              bool is_signed) {
    const int shift = x.exponent - scale_factor;
    i128 scaled = 0;
    if (x.mantissa == 0) {
        scaled = 0;
    } else if (shift >= 0) {
        if (shift > 20) throw SvError(ErrorCode::Overflow, x.to_string() + " out of range at this scale");
        scaled = static_cast<i128>(x.mantissa) * pow10_128(shift);
    } else if (-shift > kMaxShift) {
        scaled = 0;  // |x| < 10^19 * 10^-39, far below half a unit
    } else {
        const i128 div = pow10_128(-shift);
        const i128 m = x.mantissa;
        i128 q = m / div;
        const i128 r = m % div;
        const i128 twice = (r < 0 ? -r : r) * 2;
        if (twice > div || (twice == div && (q % 2 != 0))) q += (m < 0 ? -1 : 1);
        scaled = q;
    }
    const i128 raw = scaled - offset;
    if (raw > INT64_MAX || raw < INT64_MIN || !ber::fits_width(static_cast<std::int64_t>(raw), width, is_signed)) {
        throw SvError(ErrorCode::Overflow, x.to_string() + " at scale 10^" + std::to_string(scale_factor) +
                                               " does not fit " + std::to_string(width) + " octets");
    }
    return static_cast<std::int64_t>(raw);
}

std::int64_t from_engineering(double x, std::int8_t scale_factor, std::int32_t offset, std::size_t width,
                              bool is_signed) {
    return from_engineering(Decimal::from_double(x), scale_factor, offset, width, is_signed);
}

std::string_view to_string(Validity v) {
    switch (v) {
        case Validity::Good: return "good";
        case Validity::Invalid: return "invalid";
        case Validity::Questionable: return "questionable";
    }
    return "?";
}

std::array<std::uint8_t, 2> encode_quality(const Quality& q) {
    const auto bits = static_cast<std::uint8_t>(static_cast<std::uint8_t>(q.validity) | (q.test ? 0x04 : 0x00));
    return {0x00, bits};
}

Quality decode_quality(std::span<const std::uint8_t> octets) {
    if (octets.size() != 2) throw SvError(ErrorCode::WidthMismatch, "quality needs 2 octets");
    const std::uint8_t v = octets[1] & 0x03;
    if (octets[0] != 0 || (octets[1] & ~0x07) != 0 || v == 3) {
        throw SvError(ErrorCode::InvalidArgument, "reserved quality bits set");
    }
    return Quality{static_cast<Validity>(v), (octets[1] & 0x04) != 0};
}

namespace {

void check_dop(std::uint16_t dop, const char* name) {
    if (dop < GeoCoordinate::kMinDop || dop > GeoCoordinate::kMaxDop) {
        throw SvError(ErrorCode::OutOfRange, std::string(name) + " " + std::to_string(dop) + " outside [5, 999]");
    }
}

} // namespace

GeoCoordinate::GeoCoordinate(std::int32_t b_raw, std::int32_t l_raw, std::int16_t h_raw, std::uint16_t pdop,
                             std::uint16_t hdop, std::uint16_t vdop)
    : b_(b_raw), l_(l_raw), h_(h_raw), pdop_(pdop), hdop_(hdop), vdop_(vdop) {
    if (b_raw < -kMaxB || b_raw > kMaxB) {
        throw SvError(ErrorCode::OutOfRange, "GeoCrd.B " + std::to_string(b_raw) + " outside +-1.8E8");
    }
    if (l_raw < -kMaxL || l_raw > kMaxL) {
        throw SvError(ErrorCode::OutOfRange, "GeoCrd.L " + std::to_string(l_raw) + " outside +-9E7");
    }
    if (h_raw < -kMaxH || h_raw > kMaxH) {
        throw SvError(ErrorCode::OutOfRange, "GeoCrd.H " + std::to_string(h_raw) + " outside +-9999");
    }
    check_dop(pdop, "GeoCrd.PDOP");
    check_dop(hdop, "GeoCrd.HDOP");
    check_dop(vdop, "GeoCrd.VDOP");
}

RectCoordinate::RectCoordinate(std::int16_t x_raw, std::int16_t y_raw, std::int16_t z_raw, std::int8_t scale_factor,
                               std::int16_t offset, std::uint16_t pdop, std::uint16_t xdop, std::uint16_t ydop,
                               std::uint16_t zdop)
    : x_(x_raw), y_(y_raw), z_(z_raw), scale_factor_(scale_factor), offset_(offset),
      pdop_(pdop), xdop_(xdop), ydop_(ydop), zdop_(zdop) {
    check_dop(pdop, "RecCrd.PDOP");
    check_dop(xdop, "RecCrd.XDOP");
    check_dop(ydop, "RecCrd.YDOP");
    check_dop(zdop, "RecCrd.ZDOP");
}

namespace {

constexpr std::array<LogicNodeDescriptor, 7> kLogicNodes{{
    {"TMGF", "Magnetic field sensor", "MagFld", "SAV"},
    {"TEEF", "Electrical field sensor", "EleFld", "SAV"},
    {"TTMP", "Temperature sensor", "Tmp", "SAV"},
    {"TVBR", "Vibration sensor", "Vbr", "SAV"},
    {"THUM", "Humidity sensor", "Hmdt", "SAV"},
    {"TCTR", "Current transformer", "AmpSv", "SAV"},
    {"VCVR", "Voltage transformer", "VolSv", "SAV"},
}};

} // namespace

std::span<const LogicNodeDescriptor> logic_nodes() { return kLogicNodes; }

const LogicNodeDescriptor& lookup_logic_node(std::string_view name) {
    for (const auto& ln : kLogicNodes) {
        if (ln.ln_name == name) return ln;
    }
    throw SvError(ErrorCode::UnknownLogicNode, "no logic node named '" + std::string(name) + "'");
}

std::size_t DatasetSchema::packed_width() const {
    std::size_t total = 0;
    for (const auto& m : members) total += m.packed_width();
    return total;
}

std::size_t DatasetSchema::top_level_attribute_count() const {
    std::set<std::string_view> parents;
    for (const auto& m : members) {
        std::string_view name = m.name;
        const auto dot = name.rfind('.');
        parents.insert(dot == std::string_view::npos ? name : name.substr(0, dot));
    }
    return parents.size();
}

void DatasetSchema::validate() const {
    for (const auto& m : members) {
        if (m.name.empty()) throw SvError(ErrorCode::InvalidArgument, "dataset member without a name");
        if (m.width != 2 && m.width != 4) {
            throw SvError(ErrorCode::BadWidth, "member " + m.name + " width " + std::to_string(m.width) +
                                                   " (expected 2 or 4)");
        }
    }
}

DatasetSchema reference_schema(std::string_view prefix) {
    const std::string p = prefix.empty() ? std::string() : std::string(prefix) + ".";
    return DatasetSchema{{
        {p + "intMag.i", 4, true, 0, 0, false},
        {p + "GeoCrd.B", 4, true, GeoCoordinate::kAngleScale, 0, false},
        {p + "GeoCrd.L", 4, true, GeoCoordinate::kAngleScale, 0, false},
        {p + "GeoCrd.H", 2, true, GeoCoordinate::kMetricScale, 0, false},
    }};
}

} // namespace redsv
