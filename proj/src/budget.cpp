#include "redsv/budget.hpp"

#include "redsv/error.hpp"

#include <cstdio>
#include <numeric>
#include <sstream>

namespace redsv {

Rational::Rational(std::int64_t num, std::int64_t den) {
    if (den == 0) throw SvError(ErrorCode::InvalidArgument, "zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    const std::int64_t g = std::gcd(num, den);
    num_ = num / g;
    den_ = den / g;
}

Rational operator*(const Rational& a, const Rational& b) {
    // Cross-reduce first to keep intermediates small.
    const std::int64_t g1 = std::gcd(a.num_, b.den_);
    const std::int64_t g2 = std::gcd(b.num_, a.den_);
    const std::int64_t n1 = g1 ? a.num_ / g1 : 0;
    const std::int64_t d2 = g1 ? b.den_ / g1 : b.den_;
    const std::int64_t n2 = g2 ? b.num_ / g2 : 0;
    const std::int64_t d1 = g2 ? a.den_ / g2 : a.den_;
    return Rational(n1 * n2, d1 * d2);
}

Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) throw SvError(ErrorCode::InvalidArgument, "division by zero");
    return a * Rational(b.den_, b.num_);
}

std::string format_3sig(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3g", value);
    std::string s(buf);
    if (s.find('e') != std::string::npos) {
        std::snprintf(buf, sizeof(buf), "%.0f", value);
        s = buf;
    }
    return s;
}

} // namespace redsv

namespace redsv::budget {

bool supported_points_per_period(std::uint32_t points) { return points == 80 || points == 256; }

namespace {

void check_rate(std::uint32_t nominal_hz, std::uint32_t points_per_period) {
    if (!supported_points_per_period(points_per_period)) {
        throw SvError(ErrorCode::UnsupportedRate,
                      std::to_string(points_per_period) + " points per period (supported: 80, 256)");
    }
    if (nominal_hz == 0) throw SvError(ErrorCode::InvalidArgument, "nominal frequency must be positive");
}

} // namespace

BudgetReport project_bitrate(std::uint64_t payload_octets, std::uint32_t nominal_hz, std::uint32_t points_per_period,
                             std::uint64_t capacity_bps, std::uint32_t overhead_octets) {
    check_rate(nominal_hz, points_per_period);
    BudgetReport r;
    r.payload_octets = payload_octets;
    r.wire_octets = payload_octets + overhead_octets;
    r.samples_per_second = static_cast<std::uint64_t>(nominal_hz) * points_per_period;
    r.bits_per_second = r.wire_octets * 8 * r.samples_per_second;
    r.capacity_bps = capacity_bps;
    r.fits = r.bits_per_second <= capacity_bps;
    r.margin_bps = static_cast<std::int64_t>(capacity_bps) - static_cast<std::int64_t>(r.bits_per_second);
    return r;
}

Rational sample_interval(std::uint32_t nominal_hz, std::uint32_t points_per_period) {
    check_rate(nominal_hz, points_per_period);
    return Rational(1, static_cast<std::int64_t>(nominal_hz) * points_per_period);
}

std::string Violation::to_string() const {
    switch (rule) {
        case Rule::NoAsdu: return "NoAsdu(0): savPdu carries no ASDU";
        case Rule::AsduCountExceeded:
            return "AsduCountExceeded(" + std::to_string(observed) + "): one ASDU per savPdu is recommended";
        case Rule::DatasetTooWide:
            return "DatasetTooWide(" + std::to_string(observed) + "): at most 2 data attributes per dataset";
    }
    return "?";
}

std::vector<Violation> validate_constraints(std::size_t asdu_count, const DatasetSchema& schema) {
    std::vector<Violation> out;
    if (asdu_count == 0) {
        out.push_back({Rule::NoAsdu, 0});
    } else if (asdu_count > kRecommendedAsduCount) {
        out.push_back({Rule::AsduCountExceeded, asdu_count});
    }
    const std::size_t attrs = schema.top_level_attribute_count();
    if (attrs > kMaxDatasetAttributes) out.push_back({Rule::DatasetTooWide, attrs});
    return out;
}

std::vector<Violation> validate_constraints(const SavApdu& apdu, const DatasetSchema& schema) {
    return validate_constraints(apdu.asdus.size(), schema);
}

std::string render(const BudgetReport& r) {
    const auto mbps = [](std::uint64_t bps) {
        return Decimal{static_cast<std::int64_t>(bps), -6}.to_string() + " Mbps";
    };
    std::ostringstream os;
    os << "payload octets      " << r.payload_octets << '\n'
       << "wire octets         " << r.wire_octets << " (" << r.bits_per_frame() << " bits)\n"
       << "samples per second  " << r.samples_per_second << '\n'
       << "bit rate            " << mbps(r.bits_per_second) << " (" << r.bits_per_second << " bps)\n"
       << "capacity            " << mbps(r.capacity_bps) << '\n'
       << "margin              " << (r.margin_bps < 0 ? "-" : "")
       << mbps(static_cast<std::uint64_t>(r.margin_bps < 0 ? -r.margin_bps : r.margin_bps)) << '\n'
       << "verdict             " << (r.fits ? "fits" : "exceeds capacity") << '\n';
    return os.str();
}

} // namespace redsv::budget
