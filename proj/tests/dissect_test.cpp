#include "golden.hpp"

#include "redsv/codec.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace redsv;

namespace {

std::vector<std::string> rendered_lines(const std::vector<DissectLine>& lines) {
    std::vector<std::string> out;
    std::string text = render_dissection(lines);
    std::size_t start = 0;
    while (start < text.size()) {
        const auto nl = text.find('\n', start);
        out.push_back(text.substr(start, nl - start));
        start = nl + 1;
    }
    return out;
}

bool contains(const std::vector<std::string>& lines, const std::string& needle) {
    for (const auto& l : lines) {
        if (l.find(needle) != std::string::npos) return true;
    }
    return false;
}

std::size_t annotations(const std::vector<DissectLine>& lines) {
    std::size_t n = 0;
    for (const auto& l : lines) n += l.annotation ? 1 : 0;
    return n;
}

} // namespace

TEST(Dissect, ReferenceTree) {
    const auto lines = dissect(golden::reference_frame());
    const auto text = rendered_lines(lines);
    const std::vector<std::string> expect = {
        "Destination: 18:cc:18:8a:bc:db",
        "Source: b8:27:eb:47:1f:d7",
        "802.1Q TPID: 0x8100 (802.1Q Virtual LAN)",
        "802.1Q TCI: 0x8000 (priority 4, DEI 0, VID 0)",
        "EtherType: 0x88ba (IEC 61850/SV)",
        "APPID: 0x4000",
        "Length: 68",
        "Reserved 1: 0x0000",
        "Reserved 2: 0x0000",
        "savPdu: 58 octets",
        "  noASDU: 1",
        "  seqASDU: 53 octets",
        "    ASDU 1: 51 octets",
        "      svID: xxxxMUnn01",
        "      smpCnt: 1",
        "      confRev: 1",
        "      refrTm: 1970-01-01T00:00:00.000000Z (quality 0x00)",
        "      smpSynch: 0 (none)",
        "      seqData: 00 00 11 11 00 00 00 00 00 00 00 00 00 00",
    };
    EXPECT_EQ(text, expect);
    EXPECT_EQ(annotations(lines), 0u);
}

TEST(Dissect, SchemaBreaksOutMembers) {
    const auto text = rendered_lines(dissect(golden::reference_frame(), reference_schema()));
    EXPECT_TRUE(contains(text, "        TMGF1.MagFld.intMag.i: 4369"));
    EXPECT_TRUE(contains(text, "        TMGF1.MagFld.GeoCrd.H: 0 (0)"));
}

TEST(Dissect, RawOctetsOnRequest) {
    const std::string text = render_dissection(dissect(golden::reference_frame()), true);
    EXPECT_NE(text.find("EtherType: 0x88ba (IEC 61850/SV)  [88ba]"), std::string::npos);
}

TEST(Dissect, EmptyCapture) {
    const auto lines = dissect(Bytes{});
    ASSERT_EQ(lines.size(), 1u);
    EXPECT_EQ(render_dissection(lines), "empty capture\n");
}

TEST(Dissect, TruncatedAtForty) {
    Bytes cut = golden::reference_frame();
    cut.resize(40);
    const auto lines = dissect(cut);
    const auto text = rendered_lines(lines);
    EXPECT_EQ(text.back(), "TRUNCATED at offset 40");
    EXPECT_EQ(annotations(lines), 1u);
    EXPECT_TRUE(contains(text, "    ASDU 1: 51 octets"));
}

TEST(Dissect, LengthMismatchWarned) {
    Bytes octets = golden::reference_frame();
    octets[21] = 0x5c;
    const auto text = rendered_lines(dissect(octets));
    EXPECT_TRUE(contains(text, "Length: 92"));
    EXPECT_TRUE(contains(text, "WARNING: Length field 92 but APDU spans 68 octets"));
}

TEST(Dissect, NotSampledValues) {
    Bytes octets = golden::reference_frame();
    octets[16] = 0x08;
    octets[17] = 0x00;
    const auto text = rendered_lines(dissect(octets));
    EXPECT_TRUE(contains(text, "EtherType: 0x0800 (not IEC 61850/SV)"));
}

TEST(Dissect, RemovedFieldsFlagged) {
    Bytes octets = golden::reference_frame();
    const Bytes extra = {0x86, 0x02, 0x0f, 0xa0};
    octets.insert(octets.begin() + 70, extra.begin(), extra.end());
    octets[21] += 4;
    octets[27] += 4;
    octets[32] += 4;
    octets[34] += 4;
    const auto text = rendered_lines(dissect(octets));
    EXPECT_TRUE(contains(text, "      smpRate: 4000"));
    EXPECT_TRUE(contains(text, "WARNING: smpRate is not part of the reduced ASDU"));
}

// Never throws, and prints at least one line for any prefix or mutation.
TEST(DissectProperty, PrefixesAndMutations) {
    const Bytes ref = golden::reference_frame();
    for (std::size_t n = 1; n <= ref.size(); ++n) {
        const Bytes cut(ref.begin(), ref.begin() + static_cast<std::ptrdiff_t>(n));
        std::vector<DissectLine> lines;
        ASSERT_NO_THROW(lines = dissect(cut, reference_schema()));
        ASSERT_FALSE(lines.empty());
        if (n < ref.size()) EXPECT_GE(annotations(lines), 1u) << n;
    }
    std::mt19937 rng(3);
    for (int i = 0; i < 5000; ++i) {
        Bytes m = ref;
        const int flips = 1 + static_cast<int>(rng() % 4);
        for (int k = 0; k < flips; ++k) m[rng() % m.size()] = static_cast<std::uint8_t>(rng());
        if (rng() % 3 == 0) m.resize(rng() % m.size());
        ASSERT_NO_THROW(dissect(m, reference_schema()));
    }
    for (int i = 0; i < 2000; ++i) {
        Bytes junk(rng() % 200);
        for (auto& b : junk) b = static_cast<std::uint8_t>(rng());
        ASSERT_NO_THROW(dissect(junk));
    }
}

// Every field that a lenient decode yields also appears in the tree.
TEST(DissectProperty, AgreesWithLenientDecode) {
    const auto decoded = decode_frame(golden::reference_frame(), DecodeMode::Lenient).frame;
    const auto text = rendered_lines(dissect(golden::reference_frame()));
    const auto& a = decoded.apdu.asdus.front();
    EXPECT_TRUE(contains(text, "svID: " + a.sv_id));
    EXPECT_TRUE(contains(text, "smpCnt: " + std::to_string(a.smp_cnt)));
    EXPECT_TRUE(contains(text, "confRev: " + std::to_string(a.conf_rev)));
    EXPECT_TRUE(contains(text, "Destination: " + to_string(decoded.dst_mac)));
}
