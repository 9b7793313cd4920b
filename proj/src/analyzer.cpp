#include "redsv/analyzer.hpp"

#include "redsv/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>

namespace redsv::analyzer {

Analyzer::Analyzer(DatasetSchema schema, Options options)
    : schema_(std::move(schema)), options_(options), expected_(options.initial_expected) {
    if (options_.wrap_modulus < 2 || options_.wrap_modulus > 65536) {
        throw SvError(ErrorCode::InvalidArgument, "wrap modulus must lie in [2, 65536]");
    }
    if (expected_ && *expected_ >= options_.wrap_modulus) {
        throw SvError(ErrorCode::InvalidArgument, "initial counter outside the wrap modulus");
    }
}

bool Analyzer::ingest(ByteView datagram, Duration arrival_time) {
    std::vector<std::vector<MemberValue>> values;
    DecodedFrame decoded;
    try {
        decoded = decode_frame(datagram, DecodeMode::Lenient);
        for (const auto& asdu : decoded.frame.apdu.asdus) {
            if (asdu.smp_cnt >= options_.wrap_modulus) {
                throw SvError(ErrorCode::OutOfRange, "smpCnt beyond wrap modulus");
            }
            values.push_back(unpack_seq_data(asdu.seq_data, schema_));
        }
    } catch (const std::exception&) {
        ++counters_.decode_failures;
        return false;
    }

    if (last_arrival_) {
        // Welford running mean/variance of inter-arrival gaps, in µs.
        const double gap = std::chrono::duration<double, std::micro>(arrival_time - *last_arrival_).count();
        ++gaps_;
        const double delta = gap - gap_mean_;
        gap_mean_ += delta / static_cast<double>(gaps_);
        gap_m2_ += delta * (gap - gap_mean_);
    }
    last_arrival_ = arrival_time;

    const auto& asdus = decoded.frame.apdu.asdus;
    for (std::size_t i = 0; i < asdus.size(); ++i) {
        ++counters_.received;
        track_sequence(asdus[i].smp_cnt);
        bool reliable = true;
        for (const auto& v : values[i]) {
            if (v.quality && v.quality->validity != Validity::Good) reliable = false;
        }
        if (!reliable) {
            ++counters_.quality_discarded;
            continue;
        }
        ++counters_.accepted;
        if (options_.keep_accepted) accepted_.push_back({asdus[i].smp_cnt, std::move(values[i]), arrival_time});
    }
    return true;
}

void Analyzer::track_sequence(std::uint16_t smp_cnt) {
    const std::uint32_t w = options_.wrap_modulus;
    if (!expected_) {
        expected_ = static_cast<std::uint16_t>((smp_cnt + 1u) % w);
        return;
    }
    const std::uint32_t gap = (smp_cnt + w - *expected_) % w;
    if (gap == 0) {
        expected_ = static_cast<std::uint16_t>((smp_cnt + 1u) % w);
    } else if (2 * gap < w) {
        counters_.lost += gap;
        for (std::uint32_t i = 0; i < gap; ++i) missing_.push_back(static_cast<std::uint16_t>((*expected_ + i) % w));
        expected_ = static_cast<std::uint16_t>((smp_cnt + 1u) % w);
    } else {
        // Behind the expected counter: late or duplicated, never loss. A late
        // frame that fills a recorded gap takes its loss back.
        ++counters_.out_of_order;
        const auto it = std::find(missing_.begin(), missing_.end(), smp_cnt);
        if (it != missing_.end()) {
            missing_.erase(it);
            --counters_.lost;
        }
    }
    while (!missing_.empty() && 2 * ((*expected_ + w - missing_.front()) % w) > w) missing_.pop_front();
}

void Analyzer::end_of_stream(std::uint16_t next_smp_cnt) {
    if (!expected_) return;
    const std::uint32_t w = options_.wrap_modulus;
    const std::uint32_t gap = (next_smp_cnt % w + w - *expected_) % w;
    if (2 * gap < w) {
        counters_.lost += gap;
        expected_ = static_cast<std::uint16_t>(next_smp_cnt % w);
    }
}

LinkStats Analyzer::report() const {
    LinkStats s = counters_;
    const std::uint64_t total = s.received + s.lost;
    s.loss_rate = total > 0 ? static_cast<double>(s.lost) / static_cast<double>(total) : 0.0;
    s.inter_arrival_mean_us = gap_mean_;
    s.inter_arrival_stddev_us = gaps_ > 0 ? std::sqrt(gap_m2_ / static_cast<double>(gaps_)) : 0.0;
    return s;
}

std::string render(const LinkStats& s) {
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "received              %llu\n"
                  "decode_failures       %llu\n"
                  "lost                  %llu\n"
                  "out_of_order          %llu\n"
                  "quality_discarded     %llu\n"
                  "accepted              %llu\n"
                  "loss_rate             %.6f\n"
                  "inter_arrival_mean    %.3f us\n"
                  "inter_arrival_stddev  %.3f us\n",
                  static_cast<unsigned long long>(s.received), static_cast<unsigned long long>(s.decode_failures),
                  static_cast<unsigned long long>(s.lost), static_cast<unsigned long long>(s.out_of_order),
                  static_cast<unsigned long long>(s.quality_discarded), static_cast<unsigned long long>(s.accepted),
                  s.loss_rate, s.inter_arrival_mean_us, s.inter_arrival_stddev_us);
    return buf;
}

} // namespace redsv::analyzer
