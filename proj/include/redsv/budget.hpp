#pragma once

#include "redsv/codec.hpp"
#include "redsv/model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace redsv {

/// Exact non-negative-denominator fraction, always in lowest terms.
class Rational {
public:
    constexpr Rational() = default;
    Rational(std::int64_t num, std::int64_t den = 1);

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }
    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    friend Rational operator*(const Rational& a, const Rational& b);
    friend Rational operator/(const Rational& a, const Rational& b);
    friend bool operator==(const Rational& a, const Rational& b) = default;

private:
    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

/// Formats with 3 significant figures, e.g. 78.125 -> "78.1".
std::string format_3sig(double value);

} // namespace redsv

namespace redsv::budget {

/// Outer Ethernet (14) + IPv4 (20) + UDP (8) octets around each payload.
inline constexpr std::uint32_t kIpv4UdpOverhead = 42;
/// Same with a 40-octet IPv6 header.
inline constexpr std::uint32_t kIpv6UdpOverhead = 62;

/// Points per nominal period the reduced profile allows.
bool supported_points_per_period(std::uint32_t points);

struct BudgetReport {
    std::uint64_t payload_octets = 0;
    std::uint64_t wire_octets = 0;
    std::uint64_t samples_per_second = 0;
    std::uint64_t bits_per_second = 0;
    std::uint64_t capacity_bps = 0;
    bool fits = false;
    std::int64_t margin_bps = 0;

    std::uint64_t bits_per_frame() const { return wire_octets * 8; }
};

/// Throws UnsupportedRate unless points_per_period is 80 or 256, and
/// InvalidArgument for a zero nominal frequency.
BudgetReport project_bitrate(std::uint64_t payload_octets, std::uint32_t nominal_hz, std::uint32_t points_per_period,
                             std::uint64_t capacity_bps, std::uint32_t overhead_octets = kIpv4UdpOverhead);

/// Exact 1 / (nominal_hz * points_per_period) seconds.
Rational sample_interval(std::uint32_t nominal_hz, std::uint32_t points_per_period);

enum class Rule { NoAsdu, AsduCountExceeded, DatasetTooWide };

struct Violation {
    Rule rule;
    std::uint64_t observed = 0;

    std::string to_string() const;
    bool operator==(const Violation&) const = default;
};

inline constexpr std::size_t kRecommendedAsduCount = 1;
inline constexpr std::size_t kMaxDatasetAttributes = 2;

/// Empty iff exactly one ASDU and at most two top-level data attributes.
std::vector<Violation> validate_constraints(const SavApdu& apdu, const DatasetSchema& schema);
std::vector<Violation> validate_constraints(std::size_t asdu_count, const DatasetSchema& schema);

/// Multi-line aligned rendering used by the CLI.
std::string render(const BudgetReport& report);

} // namespace redsv::budget
