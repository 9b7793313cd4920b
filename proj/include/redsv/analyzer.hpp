#pragma once

#include "redsv/codec.hpp"
#include "redsv/model.hpp"

#include <chrono>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

namespace redsv::analyzer {

using Duration = std::chrono::nanoseconds;

struct LinkStats {
    std::uint64_t received = 0;  // ASDUs decoded
    std::uint64_t decode_failures = 0;
    std::uint64_t lost = 0;
    std::uint64_t out_of_order = 0;
    std::uint64_t quality_discarded = 0;
    std::uint64_t accepted = 0;
    double loss_rate = 0.0;
    double inter_arrival_mean_us = 0.0;
    double inter_arrival_stddev_us = 0.0;

    bool operator==(const LinkStats&) const = default;
};

/// Aligned "key  value" text, one counter per line. Output depends only on
/// the stats, so identical runs render byte-identical reports.
std::string render(const LinkStats& stats);

struct AcceptedRecord {
    std::uint16_t smp_cnt = 0;
    std::vector<MemberValue> values;
    Duration arrival{0};
};

struct Options {
    std::uint32_t wrap_modulus = 4000;
    /// Counter value the first frame is checked against. Without it the
    /// first frame only establishes the sequence.
    std::optional<std::uint16_t> initial_expected;
    /// Keep every accepted record in memory (off for long live captures).
    bool keep_accepted = true;
};

/// Per-stream subscriber analysis: smpCnt gap and reorder detection plus the
/// discard-unreliable-data policy. Single writer.
class Analyzer {
public:
    explicit Analyzer(DatasetSchema schema, Options options = {});

    /// Returns false when the datagram could not be decoded; such frames only
    /// bump decode_failures and do not move the expected counter.
    bool ingest(ByteView datagram, Duration arrival_time);

    /// Accounts for frames lost after the last arrival, given the counter
    /// the publisher would have used next.
    void end_of_stream(std::uint16_t next_smp_cnt);

    LinkStats report() const;

    const std::vector<AcceptedRecord>& accepted() const { return accepted_; }
    const DatasetSchema& schema() const { return schema_; }
    std::uint32_t wrap_modulus() const { return options_.wrap_modulus; }

private:
    void track_sequence(std::uint16_t smp_cnt);

    DatasetSchema schema_;
    Options options_;
    std::optional<std::uint16_t> expected_;
    // Counters booked as lost that may still arrive late, oldest first.
    std::deque<std::uint16_t> missing_;
    LinkStats counters_;
    std::vector<AcceptedRecord> accepted_;

    std::optional<Duration> last_arrival_;
    std::uint64_t gaps_ = 0;
    double gap_mean_ = 0.0;
    double gap_m2_ = 0.0;
};

} // namespace redsv::analyzer
