#include "redsv/error.hpp"
#include "redsv/model.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>

using namespace redsv;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const SvError& e) {
        return e.code();
    }
    ADD_FAILURE() << "no SvError thrown";
    return ErrorCode::InvalidArgument;
}

Decimal D(std::string_view s) { return Decimal::parse(s); }

} // namespace

TEST(ToEngineering, Examples) {
    EXPECT_EQ(to_engineering({9999, 0, -1}).to_string(), "999.9");
    EXPECT_EQ(to_engineering({0, 0, -4}).to_string(), "0");
    EXPECT_EQ(to_engineering({123, 0, 0}).to_string(), "123");
    EXPECT_EQ(to_engineering({123, 0, 2}).to_string(), "12300");
    EXPECT_EQ(to_engineering({-5, 0, -3}).to_string(), "-0.005");
    EXPECT_EQ(to_engineering({10, 5, -1}).to_string(), "1.5");
}

TEST(ToEngineering, ExactAtExtremes) {
    // (i + offset) can exceed 32 bits; the sum is exact.
    EXPECT_EQ(to_engineering({INT32_MAX, INT32_MAX, -4}), D("429496.7294"));
    EXPECT_EQ(to_engineering({180000000, 0, -4}), D("18000"));
}

TEST(DecimalValue, EqualityIgnoresTrailingZeros) {
    EXPECT_EQ(D("1.50"), D("1.5"));
    EXPECT_EQ((Decimal{150, -2}), (Decimal{15, -1}));
    EXPECT_FALSE(D("1.5") == D("1.05"));
    EXPECT_EQ(D("-0"), D("0"));
    EXPECT_EQ(D("2.5e3"), D("2500"));
}

TEST(DecimalValue, RejectsGarbage) {
    EXPECT_EQ(code_of([] { D("abc"); }), ErrorCode::InvalidArgument);
    EXPECT_EQ(code_of([] { D("1.2.3"); }), ErrorCode::InvalidArgument);
    EXPECT_EQ(code_of([] { D(""); }), ErrorCode::InvalidArgument);
}

TEST(FromEngineering, Examples) {
    EXPECT_EQ(from_engineering(D("999.9"), -1, 0, 2), 9999);
    EXPECT_EQ(from_engineering(D("0"), -4, 0, 4), 0);
    EXPECT_EQ(from_engineering(D("0"), 3, 0, 4), 0);
    EXPECT_EQ(from_engineering(D("22.505"), -2, 0, 4), 2250);
}

TEST(FromEngineering, HalfEvenBothDirections) {
    EXPECT_EQ(from_engineering(D("22.515"), -2, 0, 4), 2252);
    EXPECT_EQ(from_engineering(D("0.5"), 0, 0, 4), 0);
    EXPECT_EQ(from_engineering(D("1.5"), 0, 0, 4), 2);
    EXPECT_EQ(from_engineering(D("2.5"), 0, 0, 4), 2);
    EXPECT_EQ(from_engineering(D("-2.5"), 0, 0, 4), -2);
    EXPECT_EQ(from_engineering(D("-3.5"), 0, 0, 4), -4);
    EXPECT_EQ(from_engineering(D("2.5000001"), 0, 0, 4), 3);
    EXPECT_EQ(from_engineering(D("1250"), 2, 0, 4), 12);
    EXPECT_EQ(from_engineering(D("1350"), 2, 0, 4), 14);
}

TEST(FromEngineering, DoubleGoesThroughShortestDecimal) {
    // 22.505 as a double is slightly below 22.505; the contract is decimal.
    EXPECT_EQ(from_engineering(22.505, -2, 0, 4), 2250);
    EXPECT_EQ(from_engineering(22.5, -1, 0, 4), 225);
}

TEST(FromEngineering, OffsetSubtracted) {
    EXPECT_EQ(from_engineering(D("1.5"), -1, 5, 4), 10);
    EXPECT_EQ(to_engineering({10, 5, -1}), D("1.5"));
}

TEST(FromEngineering, Overflow) {
    EXPECT_EQ(code_of([] { from_engineering(D("3276.8"), -1, 0, 2); }), ErrorCode::Overflow);
    EXPECT_EQ(code_of([] { from_engineering(D("-3276.9"), -1, 0, 2); }), ErrorCode::Overflow);
    EXPECT_EQ(code_of([] { from_engineering(D("1e30"), 0, 0, 4); }), ErrorCode::Overflow);
    EXPECT_EQ(from_engineering(D("-3276.8"), -1, 0, 2), -32768);
}

TEST(FromEngineeringProperty, RoundTripAtScalePrecision) {
    std::mt19937_64 rng(11);
    for (int sf = -4; sf <= 2; ++sf) {
        for (int i = 0; i < 3000; ++i) {
            const std::int64_t raw = static_cast<std::int32_t>(rng());
            const Decimal x{raw, sf};
            const auto back = from_engineering(x, static_cast<std::int8_t>(sf), 0, 4);
            ASSERT_EQ(back, raw);
            ASSERT_EQ(to_engineering({static_cast<std::int32_t>(back), 0, static_cast<std::int8_t>(sf)}), x);
        }
    }
}

TEST(Quality, Layout) {
    using A = std::array<std::uint8_t, 2>;
    EXPECT_EQ(encode_quality({Validity::Good, false}), (A{0x00, 0x00}));
    EXPECT_EQ(encode_quality({Validity::Invalid, true}), (A{0x00, 0x05}));
    EXPECT_EQ(encode_quality({Validity::Questionable, false}), (A{0x00, 0x02}));
}

TEST(Quality, InjectiveAndInvertible) {
    std::set<std::array<std::uint8_t, 2>> seen;
    for (auto v : {Validity::Good, Validity::Invalid, Validity::Questionable}) {
        for (bool t : {false, true}) {
            const auto e = encode_quality({v, t});
            seen.insert(e);
            EXPECT_EQ(decode_quality(e), (Quality{v, t}));
        }
    }
    EXPECT_EQ(seen.size(), 6u);
}

TEST(Quality, ReservedBitsRejected) {
    const std::uint8_t bad1[2] = {0x01, 0x00};
    const std::uint8_t bad2[2] = {0x00, 0x08};
    const std::uint8_t bad3[2] = {0x00, 0x03};
    EXPECT_THROW(decode_quality(bad1), SvError);
    EXPECT_THROW(decode_quality(bad2), SvError);
    EXPECT_THROW(decode_quality(bad3), SvError);
}

TEST(GeoCoordinate, BoundariesAccepted) {
    EXPECT_NO_THROW(GeoCoordinate(180000000, 90000000, 9999, 5, 999, 5));
    EXPECT_NO_THROW(GeoCoordinate(-180000000, -90000000, -9999, 999, 5, 999));
    const GeoCoordinate g(180000000, -90000000, 9999);
    EXPECT_EQ(g.latitude(), D("18000"));
    EXPECT_EQ(g.longitude(), D("-9000"));
    EXPECT_EQ(g.height(), D("999.9"));
}

TEST(GeoCoordinate, JustOutsideRejected) {
    EXPECT_EQ(code_of([] { GeoCoordinate(180000001, 0, 0); }), ErrorCode::OutOfRange);
    EXPECT_EQ(code_of([] { GeoCoordinate(-180000001, 0, 0); }), ErrorCode::OutOfRange);
    EXPECT_EQ(code_of([] { GeoCoordinate(0, 90000001, 0); }), ErrorCode::OutOfRange);
    EXPECT_EQ(code_of([] { GeoCoordinate(0, -90000001, 0); }), ErrorCode::OutOfRange);
    EXPECT_EQ(code_of([] { GeoCoordinate(0, 0, 10000); }), ErrorCode::OutOfRange);
    EXPECT_EQ(code_of([] { GeoCoordinate(0, 0, -10000); }), ErrorCode::OutOfRange);
    EXPECT_EQ(code_of([] { GeoCoordinate(0, 0, 0, 4); }), ErrorCode::OutOfRange);
    EXPECT_EQ(code_of([] { GeoCoordinate(0, 0, 0, 5, 1000); }), ErrorCode::OutOfRange);
    EXPECT_EQ(code_of([] { GeoCoordinate(0, 0, 0, 5, 5, 4); }), ErrorCode::OutOfRange);
}

TEST(RectCoordinate, DopRange) {
    EXPECT_NO_THROW(RectCoordinate(1, 2, 3, -2, 0, 5, 999, 5, 999));
    EXPECT_EQ(code_of([] { RectCoordinate(0, 0, 0, 0, 0, 1000); }), ErrorCode::OutOfRange);
    EXPECT_EQ(code_of([] { RectCoordinate(0, 0, 0, 0, 0, 5, 5, 5, 4); }), ErrorCode::OutOfRange);
    const RectCoordinate r(150, -20, 0, -1, 10);
    EXPECT_EQ(r.x(), D("16"));
    EXPECT_EQ(r.y(), D("-1"));
    EXPECT_EQ(r.z(), D("1"));
}

TEST(LogicNodes, Lookup) {
    const auto& tmgf = lookup_logic_node("TMGF");
    EXPECT_EQ(tmgf.description, "Magnetic field sensor");
    EXPECT_EQ(tmgf.measurement_do, "MagFld");
    EXPECT_EQ(tmgf.cdc, "SAV");
    const auto& teef = lookup_logic_node("TEEF");
    EXPECT_EQ(teef.description, "Electrical field sensor");
    EXPECT_EQ(teef.measurement_do, "EleFld");
    EXPECT_EQ(code_of([] { lookup_logic_node("XXXX"); }), ErrorCode::UnknownLogicNode);
    EXPECT_EQ(code_of([] { lookup_logic_node("tmgf"); }), ErrorCode::UnknownLogicNode);
}

TEST(LogicNodes, ExactlySeven) {
    const std::set<std::pair<std::string_view, std::string_view>> expect = {
        {"TMGF", "MagFld"}, {"TEEF", "EleFld"}, {"TTMP", "Tmp"},   {"TVBR", "Vbr"},
        {"THUM", "Hmdt"},   {"TCTR", "AmpSv"},  {"VCVR", "VolSv"},
    };
    std::set<std::pair<std::string_view, std::string_view>> got;
    for (const auto& ln : logic_nodes()) {
        got.insert({ln.ln_name, ln.measurement_do});
        EXPECT_EQ(ln.cdc, "SAV");
    }
    EXPECT_EQ(logic_nodes().size(), 7u);
    EXPECT_EQ(got, expect);
}

TEST(DatasetSchema, ReferenceLayout) {
    const auto s = reference_schema();
    ASSERT_EQ(s.members.size(), 4u);
    EXPECT_EQ(s.members[0].name, "TMGF1.MagFld.intMag.i");
    EXPECT_EQ(s.packed_width(), 14u);
    EXPECT_EQ(s.top_level_attribute_count(), 2u);
    EXPECT_NO_THROW(s.validate());
}

TEST(DatasetSchema, QualityAddsTwoOctets) {
    DatasetSchema s{{{"a.v", 4, true, 0, 0, true}, {"b.v", 2, true, 0, 0, false}}};
    EXPECT_EQ(s.packed_width(), 8u);
}

TEST(DatasetSchema, WidthValidated) {
    DatasetSchema s{{{"a.v", 3, true, 0, 0, false}}};
    EXPECT_EQ(code_of([&] { s.validate(); }), ErrorCode::BadWidth);
}
