#include "redsv/codec.hpp"

#include "redsv/error.hpp"
#include "redsv/hex.hpp"

#include <ctime>
#include <string>

namespace redsv {

MacAddress parse_mac(std::string_view text) {
    MacAddress mac{};
    std::string compact;
    for (char c : text) {
        if (c != ':' && c != '-') compact += c;
    }
    Bytes octets;
    try {
        octets = parse_hex(compact);
    } catch (const SvError&) {
        octets.clear();
    }
    if (octets.size() != 6 || compact.size() != 12) {
        throw SvError(ErrorCode::InvalidArgument, "bad MAC address '" + std::string(text) + "'");
    }
    std::copy(octets.begin(), octets.end(), mac.begin());
    return mac;
}

std::string to_string(const MacAddress& mac) { return to_hex(mac, ":"); }

std::uint16_t VlanTag::tci() const {
    return static_cast<std::uint16_t>(((priority & 0x07) << 13) | (dei ? 0x1000 : 0) | (vid & 0x0FFF));
}

VlanTag VlanTag::from_tci(std::uint16_t tci) {
    return VlanTag{static_cast<std::uint8_t>(tci >> 13), (tci & 0x1000) != 0, static_cast<std::uint16_t>(tci & 0x0FFF)};
}

UtcTimestamp UtcTimestamp::from_nanoseconds(std::chrono::nanoseconds since_epoch, std::uint8_t quality) {
    const auto ns = since_epoch.count();
    const auto secs = ns / 1'000'000'000;
    const auto rem = static_cast<std::uint64_t>(ns % 1'000'000'000);
    return UtcTimestamp{static_cast<std::uint32_t>(secs),
                        static_cast<std::uint32_t>((rem << 24) / 1'000'000'000), quality};
}

std::chrono::nanoseconds UtcTimestamp::to_nanoseconds() const {
    const std::uint64_t frac_ns = (static_cast<std::uint64_t>(fraction & 0xFFFFFF) * 1'000'000'000) >> 24;
    return std::chrono::nanoseconds(static_cast<std::int64_t>(seconds) * 1'000'000'000 +
                                    static_cast<std::int64_t>(frac_ns));
}

std::string UtcTimestamp::to_string() const {
    const std::time_t t = seconds;
    std::tm tm{};
    gmtime_r(&t, &tm);
    char date[32];
    std::strftime(date, sizeof(date), "%Y-%m-%dT%H:%M:%S", &tm);
    const std::uint64_t micros = (static_cast<std::uint64_t>(fraction & 0xFFFFFF) * 1'000'000) >> 24;
    char frac[16];
    std::snprintf(frac, sizeof(frac), ".%06llu", static_cast<unsigned long long>(micros));
    return std::string(date) + frac + "Z";
}

std::string_view to_string(SmpSynch s) {
    switch (s) {
        case SmpSynch::None: return "none";
        case SmpSynch::Local: return "local";
        case SmpSynch::Global: return "global";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// seqData

Bytes pack_seq_data(std::span<const MemberValue> values, const DatasetSchema& schema) {
    if (values.size() != schema.members.size()) {
        throw SvError(ErrorCode::CountMismatch, std::to_string(values.size()) + " values for " +
                                                    std::to_string(schema.members.size()) + " members");
    }
    Bytes out;
    out.reserve(schema.packed_width());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const DatasetMember& m = schema.members[i];
        const MemberValue& v = values[i];
        if (!ber::fits_width(v.raw, m.width, m.is_signed)) {
            throw SvError(ErrorCode::Overflow, m.name + " value " + std::to_string(v.raw) + " does not fit " +
                                                   std::to_string(m.width) + (m.is_signed ? " signed" : " unsigned") +
                                                   " octets");
        }
        if (m.is_signed) {
            ber::append_int_fixed(out, v.raw, m.width);
        } else {
            ber::append_uint_fixed(out, static_cast<std::uint64_t>(v.raw), m.width);
        }
        if (m.include_quality) {
            const auto q = encode_quality(v.quality.value_or(Quality{}));
            out.insert(out.end(), q.begin(), q.end());
        } else if (v.quality) {
            throw SvError(ErrorCode::SchemaMismatch, m.name + " carries no quality slot");
        }
    }
    return out;
}

std::vector<MemberValue> unpack_seq_data(ByteView octets, const DatasetSchema& schema) {
    if (octets.size() != schema.packed_width()) {
        throw SvError(ErrorCode::WidthMismatch, std::to_string(octets.size()) + " octets for a " +
                                                    std::to_string(schema.packed_width()) + "-octet dataset");
    }
    std::vector<MemberValue> values;
    values.reserve(schema.members.size());
    std::size_t pos = 0;
    for (const auto& m : schema.members) {
        const ByteView field = octets.subspan(pos, m.width);
        MemberValue v;
        v.raw = m.is_signed ? ber::decode_int_fixed(field) : static_cast<std::int64_t>(ber::decode_uint_fixed(field));
        pos += m.width;
        if (m.include_quality) {
            v.quality = decode_quality(octets.subspan(pos, 2));
            pos += 2;
        }
        values.push_back(v);
    }
    return values;
}

// ---------------------------------------------------------------------------
// Encoding

namespace {

void check_sv_id(const std::string& sv_id) {
    if (sv_id.empty()) throw SvError(ErrorCode::InvalidArgument, "empty svID");
    if (sv_id.size() > 64) {
        throw SvError(ErrorCode::OversizeValue, "svID of " + std::to_string(sv_id.size()) + " characters (max 64)");
    }
    for (unsigned char c : sv_id) {
        if (c < 0x20 || c > 0x7E) throw SvError(ErrorCode::InvalidArgument, "svID is not printable ASCII");
    }
}

void append_be16(Bytes& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
}

Bytes encode_asdu(const Asdu& asdu) {
    Bytes body;
    body.reserve(48 + asdu.sv_id.size() + asdu.seq_data.size());
    const ByteView id(reinterpret_cast<const std::uint8_t*>(asdu.sv_id.data()), asdu.sv_id.size());
    ber::append_tlv(body, tags::kSvId, id);
    ber::append_tlv(body, tags::kSmpCnt, ber::encode_uint_fixed(asdu.smp_cnt, 2));
    ber::append_tlv(body, tags::kConfRev, ber::encode_uint_fixed(asdu.conf_rev, 4));

    Bytes tm = ber::encode_uint_fixed(asdu.refr_tm.seconds, 4);
    if (asdu.refr_tm.fraction > 0xFFFFFF) throw SvError(ErrorCode::Overflow, "refrTm fraction exceeds 24 bits");
    tm.push_back(static_cast<std::uint8_t>(asdu.refr_tm.fraction >> 16));
    tm.push_back(static_cast<std::uint8_t>(asdu.refr_tm.fraction >> 8));
    tm.push_back(static_cast<std::uint8_t>(asdu.refr_tm.fraction));
    tm.push_back(asdu.refr_tm.time_quality);
    ber::append_tlv(body, tags::kRefrTm, tm);

    const std::uint8_t synch = static_cast<std::uint8_t>(asdu.smp_synch);
    ber::append_tlv(body, tags::kSmpSynch, ByteView(&synch, 1));
    ber::append_tlv(body, tags::kSeqData, asdu.seq_data);
    return body;
}

} // namespace

Bytes encode_apdu(const SavApdu& apdu, const DatasetSchema& schema) {
    if (apdu.asdus.empty()) throw SvError(ErrorCode::InvalidArgument, "savPdu needs at least one ASDU");
    if (apdu.asdus.size() > 0xFF) throw SvError(ErrorCode::OversizeValue, "more than 255 ASDUs");
    const std::size_t width = schema.packed_width();
    Bytes seq;
    for (const auto& asdu : apdu.asdus) {
        check_sv_id(asdu.sv_id);
        if (asdu.seq_data.size() != width) {
            throw SvError(ErrorCode::SchemaMismatch, "seqData of " + std::to_string(asdu.seq_data.size()) +
                                                         " octets, schema packs " + std::to_string(width));
        }
        ber::append_tlv(seq, tags::kAsdu, encode_asdu(asdu));
    }
    Bytes pdu;
    const auto count = static_cast<std::uint8_t>(apdu.asdus.size());
    ber::append_tlv(pdu, tags::kNoAsdu, ByteView(&count, 1));
    ber::append_tlv(pdu, tags::kSeqAsdu, seq);
    return ber::encode_tlv(tags::kSavPdu, pdu);
}

Bytes encode_frame(const SvFrame& frame, const DatasetSchema& schema) {
    const Bytes pdu = encode_apdu(frame.apdu, schema);
    const std::size_t length = kApduHeaderLength + pdu.size();
    if (length > 0xFFFF) throw SvError(ErrorCode::OversizeValue, "APDU exceeds the 16-bit Length field");

    Bytes out;
    out.reserve(kLinkHeaderLength + length);
    out.insert(out.end(), frame.dst_mac.begin(), frame.dst_mac.end());
    out.insert(out.end(), frame.src_mac.begin(), frame.src_mac.end());
    append_be16(out, kVlanTpid);
    append_be16(out, frame.vlan.tci());
    append_be16(out, kSvEtherType);
    append_be16(out, frame.appid);
    append_be16(out, static_cast<std::uint16_t>(length));
    append_be16(out, 0);
    append_be16(out, 0);
    out.insert(out.end(), pdu.begin(), pdu.end());
    return out;
}

// ---------------------------------------------------------------------------
// Decoding

namespace {

std::uint16_t be16(ByteView b, std::size_t off) {
    return static_cast<std::uint16_t>((b[off] << 8) | b[off + 1]);
}

class FrameDecoder {
public:
    FrameDecoder(ByteView octets, DecodeMode mode) : in_(octets), strict_(mode == DecodeMode::Strict) {}

    DecodedFrame run() {
        if (in_.size() < kLinkHeaderLength + kApduHeaderLength) {
            throw SvError(ErrorCode::Truncated, "frame of " + std::to_string(in_.size()) + " octets is shorter than the " +
                                                    std::to_string(kLinkHeaderLength + kApduHeaderLength) +
                                                    "-octet header");
        }
        SvFrame& f = out_.frame;
        std::copy_n(in_.begin(), 6, f.dst_mac.begin());
        std::copy_n(in_.begin() + 6, 6, f.src_mac.begin());
        if (be16(in_, 12) != kVlanTpid) {
            throw SvError(ErrorCode::BadEtherType, "expected 802.1Q tag, found type " + hex_value(be16(in_, 12), 4));
        }
        f.vlan = VlanTag::from_tci(be16(in_, 14));
        if (be16(in_, 16) != kSvEtherType) {
            throw SvError(ErrorCode::BadEtherType, "EtherType " + hex_value(be16(in_, 16), 4) + " is not SV");
        }
        f.appid = be16(in_, 18);
        const std::uint16_t length = be16(in_, 20);
        if (be16(in_, 22) != 0 || be16(in_, 24) != 0) {
            deviation(ErrorCode::BadReserved, "reserved fields " + hex_value(be16(in_, 22), 4) + " " +
                                                  hex_value(be16(in_, 24), 4) + " are not zero");
        }

        std::size_t cursor = kLinkHeaderLength + kApduHeaderLength;
        ber::TlvView pdu = ber::decode_tlv(in_, cursor);
        while (pdu.tag != tags::kSavPdu) {
            deviation(ErrorCode::UnknownTag, "skipping tag " + hex_value(pdu.tag, 2) + " before savPdu");
            pdu = ber::decode_tlv(in_, pdu.next);
        }
        const std::size_t apdu_length = pdu.next - kLinkHeaderLength;
        if (length != apdu_length) {
            deviation(ErrorCode::LengthMismatch, "Length field " + std::to_string(length) + " but APDU spans " +
                                                     std::to_string(apdu_length) + " octets");
        }
        if (pdu.next != in_.size()) {
            deviation(ErrorCode::LengthMismatch,
                      std::to_string(in_.size() - pdu.next) + " trailing octets after savPdu");
        }
        parse_savpdu(pdu.value);
        return std::move(out_);
    }

private:
    void deviation(ErrorCode code, std::string message) {
        if (strict_) throw SvError(code, message);
        out_.warnings.push_back(std::move(message));
    }

    void parse_savpdu(ByteView body) {
        std::optional<std::uint64_t> declared;
        bool seen_seq = false;
        std::size_t cursor = 0;
        while (cursor < body.size()) {
            const ber::TlvView tlv = ber::decode_tlv(body, cursor);
            cursor = tlv.next;
            if (tlv.tag == tags::kNoAsdu) {
                if (tlv.value.empty() || tlv.value.size() > 2) {
                    throw SvError(ErrorCode::WidthMismatch, "noASDU of " + std::to_string(tlv.value.size()) + " octets");
                }
                declared = tlv.value.size() == 1 ? tlv.value[0] : be16(tlv.value, 0);
            } else if (tlv.tag == tags::kSeqAsdu) {
                seen_seq = true;
                parse_seq_asdu(tlv.value);
            } else {
                deviation(ErrorCode::UnknownTag, "unknown savPdu tag " + hex_value(tlv.tag, 2));
            }
        }
        if (!seen_seq) throw SvError(ErrorCode::MissingField, "savPdu without seqASDU");
        const auto found = out_.frame.apdu.asdus.size();
        if (!declared) {
            deviation(ErrorCode::MissingField, "savPdu without noASDU");
        } else if (*declared != found) {
            deviation(ErrorCode::CountMismatch,
                      "noASDU says " + std::to_string(*declared) + ", found " + std::to_string(found));
        }
    }

    void parse_seq_asdu(ByteView body) {
        std::size_t cursor = 0;
        while (cursor < body.size()) {
            const ber::TlvView tlv = ber::decode_tlv(body, cursor);
            cursor = tlv.next;
            if (tlv.tag == tags::kAsdu) {
                out_.frame.apdu.asdus.push_back(parse_asdu(tlv.value));
            } else {
                deviation(ErrorCode::UnknownTag, "unknown seqASDU tag " + hex_value(tlv.tag, 2));
            }
        }
    }

    static void expect_width(const ber::TlvView& tlv, std::size_t width, const char* name) {
        if (tlv.value.size() != width) {
            throw SvError(ErrorCode::WidthMismatch, std::string(name) + " has " + std::to_string(tlv.value.size()) +
                                                        " octets, expected " + std::to_string(width));
        }
    }

    Asdu parse_asdu(ByteView body) {
        Asdu asdu;
        unsigned seen = 0;
        enum : unsigned { kId = 1, kCnt = 2, kRev = 4, kTm = 8, kSynch = 16, kData = 32 };
        std::size_t cursor = 0;
        while (cursor < body.size()) {
            const ber::TlvView tlv = ber::decode_tlv(body, cursor);
            cursor = tlv.next;
            switch (tlv.tag) {
                case tags::kSvId:
                    asdu.sv_id.assign(tlv.value.begin(), tlv.value.end());
                    seen |= kId;
                    break;
                case tags::kSmpCnt:
                    expect_width(tlv, 2, "smpCnt");
                    asdu.smp_cnt = be16(tlv.value, 0);
                    seen |= kCnt;
                    break;
                case tags::kConfRev:
                    expect_width(tlv, 4, "confRev");
                    asdu.conf_rev = static_cast<std::uint32_t>(ber::decode_uint_fixed(tlv.value));
                    seen |= kRev;
                    break;
                case tags::kRefrTm:
                    expect_width(tlv, 8, "refrTm");
                    asdu.refr_tm.seconds = static_cast<std::uint32_t>(ber::decode_uint_fixed(tlv.value.first(4)));
                    asdu.refr_tm.fraction = (static_cast<std::uint32_t>(tlv.value[4]) << 16) |
                                            (static_cast<std::uint32_t>(tlv.value[5]) << 8) | tlv.value[6];
                    asdu.refr_tm.time_quality = tlv.value[7];
                    seen |= kTm;
                    break;
                case tags::kSmpSynch:
                    expect_width(tlv, 1, "smpSynch");
                    if (tlv.value[0] > 2) {
                        deviation(ErrorCode::InvalidArgument,
                                  "smpSynch value " + std::to_string(tlv.value[0]) + " read as global");
                        asdu.smp_synch = SmpSynch::Global;
                    } else {
                        asdu.smp_synch = static_cast<SmpSynch>(tlv.value[0]);
                    }
                    seen |= kSynch;
                    break;
                case tags::kSeqData:
                    asdu.seq_data.assign(tlv.value.begin(), tlv.value.end());
                    seen |= kData;
                    break;
                default:
                    deviation(ErrorCode::UnknownTag, "unknown ASDU tag " + hex_value(tlv.tag, 2));
                    break;
            }
        }
        static constexpr std::pair<unsigned, const char*> kRequired[] = {
            {kId, "svID"}, {kCnt, "smpCnt"}, {kRev, "confRev"}, {kTm, "refrTm"}, {kSynch, "smpSynch"}, {kData, "seqData"}};
        for (const auto& [bit, name] : kRequired) {
            if (!(seen & bit)) deviation(ErrorCode::MissingField, std::string("ASDU without ") + name);
        }
        return asdu;
    }

    ByteView in_;
    bool strict_;
    DecodedFrame out_;
};

} // namespace

DecodedFrame decode_frame(ByteView octets, DecodeMode mode) { return FrameDecoder(octets, mode).run(); }

} // namespace redsv
