#include "frames.hpp"

#include "redsv/analyzer.hpp"
#include "redsv/error.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace redsv;
using namespace std::chrono_literals;
using analyzer::Analyzer;
using analyzer::LinkStats;
using analyzer::Options;

namespace {

LinkStats feed(Analyzer& a, std::initializer_list<int> counters) {
    std::int64_t t = 0;
    for (int c : counters) a.ingest(frames::plain(static_cast<std::uint16_t>(c)), 250us * t++);
    return a.report();
}

} // namespace

TEST(Analyzer, FreshReportIsZero) {
    Analyzer a(reference_schema());
    EXPECT_EQ(a.report(), LinkStats{});
}

TEST(Analyzer, SingleGap) {
    Analyzer a(reference_schema());
    const auto r = feed(a, {0, 1, 2, 4});
    EXPECT_EQ(r.received, 4u);
    EXPECT_EQ(r.lost, 1u);
    EXPECT_EQ(r.out_of_order, 0u);
    EXPECT_DOUBLE_EQ(r.loss_rate, 0.2);
}

TEST(Analyzer, WrapIsNotLoss) {
    Analyzer a(reference_schema());
    const auto r = feed(a, {3998, 3999, 0, 1});
    EXPECT_EQ(r.lost, 0u);
    EXPECT_EQ(r.out_of_order, 0u);
}

TEST(Analyzer, GapAcrossWrap) {
    Analyzer a(reference_schema());
    EXPECT_EQ(feed(a, {3998, 1}).lost, 2u);
}

TEST(Analyzer, DuplicateIsOutOfOrder) {
    Analyzer a(reference_schema());
    const auto r = feed(a, {5, 6, 6, 7});
    EXPECT_EQ(r.lost, 0u);
    EXPECT_EQ(r.out_of_order, 1u);
    EXPECT_EQ(r.received, 4u);
}

TEST(Analyzer, SwappedPairIsNotLoss) {
    Analyzer a(reference_schema(), {4000, 0, true});
    const auto r = feed(a, {0, 2, 1, 3});
    EXPECT_EQ(r.lost, 0u);
    EXPECT_EQ(r.out_of_order, 1u);
}

TEST(Analyzer, HalfWindowThreshold) {
    Options o;
    o.wrap_modulus = 10;
    {
        Analyzer a(reference_schema(), o);
        // Forward gap 4 < 5: loss.
        EXPECT_EQ(feed(a, {0, 5}).lost, 4u);
    }
    {
        Analyzer a(reference_schema(), o);
        // Forward gap 5 is not < 5: treated as late.
        const auto r = feed(a, {0, 6});
        EXPECT_EQ(r.lost, 0u);
        EXPECT_EQ(r.out_of_order, 1u);
    }
}

TEST(Analyzer, InvalidQualityDiscarded) {
    Analyzer a(frames::quality_schema());
    a.ingest(frames::with_quality(0, Validity::Good), 0ns);
    a.ingest(frames::with_quality(1, Validity::Invalid), 250us);
    a.ingest(frames::with_quality(2, Validity::Questionable), 500us);
    a.ingest(frames::with_quality(3, Validity::Good), 750us);
    const auto r = a.report();
    EXPECT_EQ(r.received, 4u);
    EXPECT_EQ(r.quality_discarded, 2u);
    EXPECT_EQ(r.accepted, 2u);
    EXPECT_EQ(r.lost, 0u);
    ASSERT_EQ(a.accepted().size(), 2u);
    EXPECT_EQ(a.accepted()[0].smp_cnt, 0u);
    EXPECT_EQ(a.accepted()[1].smp_cnt, 3u);
    EXPECT_EQ(a.accepted()[1].values[0].raw, 3);
}

TEST(Analyzer, DecodeFailureDoesNotMoveCounter) {
    Analyzer a(reference_schema());
    a.ingest(frames::plain(0), 0ns);
    EXPECT_FALSE(a.ingest(Bytes{1, 2, 3}, 1us));
    Bytes cut = frames::plain(1);
    cut.resize(30);
    EXPECT_FALSE(a.ingest(cut, 2us));
    EXPECT_TRUE(a.ingest(frames::plain(1), 3us));
    const auto r = a.report();
    EXPECT_EQ(r.decode_failures, 2u);
    EXPECT_EQ(r.lost, 0u);
    EXPECT_EQ(r.received, 2u);
}

TEST(Analyzer, SchemaMismatchIsDecodeFailure) {
    Analyzer a(frames::quality_schema());
    EXPECT_FALSE(a.ingest(frames::plain(0), 0ns));
    EXPECT_EQ(a.report().decode_failures, 1u);
}

TEST(Analyzer, HundredInOrder) {
    Analyzer a(reference_schema(), {4000, 0, true});
    for (int k = 0; k < 100; ++k) a.ingest(frames::plain(static_cast<std::uint16_t>(k)), 250us * k);
    a.end_of_stream(100);
    const auto r = a.report();
    EXPECT_EQ(r.received, 100u);
    EXPECT_EQ(r.accepted, 100u);
    EXPECT_EQ(r.lost, 0u);
    EXPECT_DOUBLE_EQ(r.inter_arrival_mean_us, 250.0);
    EXPECT_NEAR(r.inter_arrival_stddev_us, 0.0, 1e-9);
}

TEST(Analyzer, InitialExpectedAndTailLoss) {
    Analyzer a(reference_schema(), {4000, 0, false});
    feed(a, {2, 3});
    a.end_of_stream(7);
    EXPECT_EQ(a.report().lost, 2u + 3u);
    EXPECT_TRUE(a.accepted().empty());
}

TEST(Analyzer, OptionsValidated) {
    EXPECT_THROW(Analyzer(reference_schema(), {1, {}, true}), SvError);
    EXPECT_THROW(Analyzer(reference_schema(), {4000, 4000, true}), SvError);
}

TEST(Analyzer, RenderStable) {
    Analyzer a(reference_schema());
    feed(a, {0, 1, 3});
    const std::string text = analyzer::render(a.report());
    EXPECT_EQ(text, analyzer::render(a.report()));
    EXPECT_NE(text.find("lost                  1\n"), std::string::npos);
}

TEST(AnalyzerProperty, CountersNeverDecrease) {
    std::mt19937 rng(17);
    Analyzer a(frames::quality_schema(), {4000, 0, false});
    LinkStats prev{};
    for (int k = 0; k < 20000; ++k) {
        const auto c = static_cast<std::uint16_t>(rng() % 4000);
        if (rng() % 10 == 0) {
            a.ingest(Bytes{0xde, 0xad}, 1us * k);
        } else {
            a.ingest(frames::with_quality(c, rng() % 5 == 0 ? Validity::Invalid : Validity::Good), 1us * k);
        }
        const auto r = a.report();
        ASSERT_GE(r.received, prev.received);
        ASSERT_GE(r.decode_failures, prev.decode_failures);
        ASSERT_GE(r.out_of_order, prev.out_of_order);
        ASSERT_GE(r.quality_discarded, prev.quality_discarded);
        ASSERT_EQ(r.accepted + r.quality_discarded, r.received);
        prev = r;
    }
}

// With loss only, received + lost equals what was sent.
TEST(AnalyzerProperty, LossOnlyAccountingExact) {
    std::mt19937 rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        const std::uint32_t sent = 1 + rng() % 9000;
        const double p = (rng() % 100) / 100.0;
        std::bernoulli_distribution drop(p);
        Analyzer a(reference_schema(), {4000, 0, false});
        for (std::uint32_t k = 0; k < sent; ++k) {
            if (!drop(rng)) a.ingest(frames::plain(static_cast<std::uint16_t>(k % 4000)), 250us * k);
        }
        a.end_of_stream(static_cast<std::uint16_t>(sent % 4000));
        const auto r = a.report();
        // Runs of 2000+ consecutive drops are indistinguishable from reordering.
        if (p < 0.9) ASSERT_EQ(r.received + r.lost, sent) << trial;
    }
}

// Adjacent swaps never change the accounting.
TEST(AnalyzerProperty, SwapsAccountExact) {
    std::mt19937 rng(29);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::uint16_t> order;
        for (std::uint16_t k = 0; k < 5000; ++k) order.push_back(k % 4000);
        std::vector<bool> keep(order.size(), true);
        for (std::size_t i = 0; i + 1 < order.size(); ++i) {
            if (rng() % 50 == 0) {
                std::swap(order[i], order[i + 1]);
                ++i;
            }
        }
        for (std::size_t i = 0; i < order.size(); ++i) keep[i] = rng() % 40 != 0;
        Analyzer a(reference_schema(), {4000, 0, false});
        std::uint64_t delivered = 0;
        for (std::size_t i = 0; i < order.size(); ++i) {
            if (!keep[i]) continue;
            ++delivered;
            a.ingest(frames::plain(order[i]), 1us * i);
        }
        a.end_of_stream(5000 % 4000);
        const auto r = a.report();
        ASSERT_EQ(r.received, delivered);
        ASSERT_EQ(r.received + r.lost, 5000u) << trial;
    }
}
