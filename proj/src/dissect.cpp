#include "redsv/codec.hpp"

#include "redsv/error.hpp"
#include "redsv/hex.hpp"

#include <exception>
#include <string>

namespace redsv {

namespace {

enum class Scope { Top, SavPdu, SeqAsdu, Asdu };

class Dissector {
public:
    Dissector(ByteView in, const DatasetSchema* schema) : in_(in), schema_(schema) {}

    std::vector<DissectLine> run() {
        if (in_.empty()) {
            note(0, "empty capture");
            return std::move(lines_);
        }
        try {
            walk_frame();
        } catch (const std::exception& e) {
            note(0, std::string("dissector error: ") + e.what());
        }
        return std::move(lines_);
    }

private:
    void line(int depth, std::string field, std::size_t off, std::size_t n, std::string value) {
        lines_.push_back({depth, std::move(field), to_hex(in_.subspan(off, n), ""), std::move(value), false});
    }

    void note(int depth, std::string text) { lines_.push_back({depth, "", "", std::move(text), true}); }

    void truncated() { note(0, "TRUNCATED at offset " + std::to_string(in_.size())); }

    bool have(std::size_t off, std::size_t n) const { return off + n <= in_.size(); }

    std::uint16_t be16(std::size_t off) const { return static_cast<std::uint16_t>((in_[off] << 8) | in_[off + 1]); }

    void walk_frame() {
        std::size_t off = 0;
        auto mac_field = [&](const char* name) {
            if (!have(off, 6)) return false;
            MacAddress mac{};
            std::copy_n(in_.begin() + static_cast<std::ptrdiff_t>(off), 6, mac.begin());
            line(0, name, off, 6, to_string(mac));
            off += 6;
            return true;
        };
        if (!mac_field("Destination") || !mac_field("Source")) return truncated();

        if (!have(off, 2)) return truncated();
        std::uint16_t type = be16(off);
        if (type == kVlanTpid) {
            line(0, "802.1Q TPID", off, 2, hex_value(type, 4) + " (802.1Q Virtual LAN)");
            off += 2;
            if (!have(off, 2)) return truncated();
            const VlanTag tag = VlanTag::from_tci(be16(off));
            line(0, "802.1Q TCI", off, 2,
                 hex_value(tag.tci(), 4) + " (priority " + std::to_string(tag.priority) + ", DEI " +
                     std::to_string(tag.dei ? 1 : 0) + ", VID " + std::to_string(tag.vid) + ")");
            off += 2;
            if (!have(off, 2)) return truncated();
            type = be16(off);
        } else {
            note(0, "untagged frame (no 802.1Q header)");
        }
        if (type != kSvEtherType) {
            line(0, "EtherType", off, 2, hex_value(type, 4) + " (not IEC 61850/SV)");
            note(0, "not a sampled-value frame; " + std::to_string(in_.size() - off - 2) + " octets undecoded");
            return;
        }
        line(0, "EtherType", off, 2, hex_value(type, 4) + " (IEC 61850/SV)");
        off += 2;
        const std::size_t apdu_start = off;

        if (!have(off, 2)) return truncated();
        line(0, "APPID", off, 2, hex_value(be16(off), 4));
        off += 2;
        if (!have(off, 2)) return truncated();
        const std::uint16_t length = be16(off);
        line(0, "Length", off, 2, std::to_string(length));
        off += 2;
        for (const char* name : {"Reserved 1", "Reserved 2"}) {
            if (!have(off, 2)) return truncated();
            line(0, name, off, 2, hex_value(be16(off), 4));
            if (be16(off) != 0) note(1, "WARNING: reserved field is not zero");
            off += 2;
        }

        const std::size_t end = walk(off, in_.size(), 0, Scope::Top);
        if (stopped_) return;
        if (end < in_.size()) {
            note(0, "WARNING: " + std::to_string(in_.size() - end) + " trailing octets: " + to_hex(in_.subspan(end)));
        }
        if (end - apdu_start != length) {
            note(0, "WARNING: Length field " + std::to_string(length) + " but APDU spans " +
                        std::to_string(end - apdu_start) + " octets");
        }
    }

    // Walks TLVs in [off, limit). Returns the offset reached.
    std::size_t walk(std::size_t off, std::size_t limit, int depth, Scope scope) {
        int asdu_index = 0;
        while (off < limit && !stopped_) {
            ber::TlvHeader h;
            try {
                h = ber::decode_tlv_header(in_.first(limit), off);
            } catch (const SvError& e) {
                if (e.code() == ErrorCode::Truncated) {
                    stop_truncated(limit);
                } else {
                    note(depth, std::string("cannot read tag at offset ") + std::to_string(off) + ": " + e.what());
                    stopped_ = true;
                }
                return off;
            }
            const std::size_t header_len = h.value_offset - off;
            const std::size_t declared_end = h.value_offset + h.length;
            const bool complete = declared_end <= limit;
            const std::size_t value_end = complete ? declared_end : limit;
            const ByteView value = in_.subspan(h.value_offset, value_end - h.value_offset);

            if (scope == Scope::Top && h.tag != tags::kSavPdu) {
                line(depth, "unknown", off, header_len, hex_value(h.tag, 2));
                note(depth, "WARNING: unexpected tag " + hex_value(h.tag, 2) + " before savPdu");
                if (!complete) return stop_truncated(limit);
                off = declared_end;
                continue;
            }

            const bool constructed = (h.tag & 0x20) != 0;
            if (constructed) {
                std::string name = container_name(scope, h.tag, asdu_index);
                line(depth, std::move(name), off, header_len, std::to_string(h.length) + " octets");
                const Scope inner = scope == Scope::Top      ? Scope::SavPdu
                                    : scope == Scope::SavPdu ? Scope::SeqAsdu
                                                             : Scope::Asdu;
                walk(h.value_offset, value_end, depth + 1, inner);
                if (stopped_) return value_end;
                if (!complete) return stop_truncated(limit);
                off = declared_end;
                if (scope == Scope::Top) return off;
                continue;
            }

            if (!complete) {
                line(depth, primitive_name(scope, h.tag), off, header_len, "(incomplete)");
                return stop_truncated(limit);
            }
            describe_primitive(depth, scope, h.tag, off, declared_end - off, value);
            off = declared_end;
        }
        return off;
    }

    std::size_t stop_truncated(std::size_t limit) {
        stopped_ = true;
        if (limit >= in_.size()) {
            truncated();
        } else {
            note(0, "WARNING: element overruns its container ending at offset " + std::to_string(limit));
        }
        return limit;
    }

    static std::string container_name(Scope scope, std::uint8_t tag, int& asdu_index) {
        if (scope == Scope::Top && tag == tags::kSavPdu) return "savPdu";
        if (scope == Scope::SavPdu && tag == tags::kSeqAsdu) return "seqASDU";
        if (scope == Scope::SeqAsdu && tag == tags::kAsdu) return "ASDU " + std::to_string(++asdu_index);
        return "constructed " + hex_value(tag, 2);
    }

    static std::string primitive_name(Scope scope, std::uint8_t tag) {
        if (scope == Scope::SavPdu && tag == tags::kNoAsdu) return "noASDU";
        if (scope == Scope::Asdu) {
            switch (tag) {
                case tags::kSvId: return "svID";
                case 0x81: return "datSet";
                case tags::kSmpCnt: return "smpCnt";
                case tags::kConfRev: return "confRev";
                case tags::kRefrTm: return "refrTm";
                case tags::kSmpSynch: return "smpSynch";
                case 0x86: return "smpRate";
                case tags::kSeqData: return "seqData";
                case 0x88: return "smpMod";
                default: break;
            }
        }
        return "tag " + hex_value(tag, 2);
    }

    void describe_primitive(int depth, Scope scope, std::uint8_t tag, std::size_t off, std::size_t n, ByteView v) {
        const std::string name = primitive_name(scope, tag);
        auto uint_value = [&]() -> std::string {
            if (v.empty() || v.size() > 8) return to_hex(v);
            std::uint64_t x = 0;
            for (auto b : v) x = (x << 8) | b;
            return std::to_string(x);
        };
        if (scope == Scope::SavPdu && tag == tags::kNoAsdu) {
            line(depth, name, off, n, uint_value());
            return;
        }
        if (scope != Scope::Asdu) {
            line(depth, name, off, n, to_hex(v));
            note(depth, "WARNING: unexpected tag " + hex_value(tag, 2));
            return;
        }
        switch (tag) {
            case tags::kSvId:
            case 0x81:
                line(depth, name, off, n, std::string(v.begin(), v.end()));
                break;
            case tags::kSmpCnt:
            case tags::kConfRev:
            case 0x86:
            case 0x88:
                line(depth, name, off, n, uint_value());
                break;
            case tags::kRefrTm:
                if (v.size() == 8) {
                    UtcTimestamp t;
                    t.seconds = static_cast<std::uint32_t>(ber::decode_uint_fixed(v.first(4)));
                    t.fraction = (static_cast<std::uint32_t>(v[4]) << 16) | (static_cast<std::uint32_t>(v[5]) << 8) | v[6];
                    t.time_quality = v[7];
                    line(depth, name, off, n, t.to_string() + " (quality " + hex_value(t.time_quality, 2) + ")");
                } else {
                    line(depth, name, off, n, to_hex(v));
                    note(depth, "WARNING: refrTm should be 8 octets");
                }
                break;
            case tags::kSmpSynch:
                if (v.size() == 1 && v[0] <= 2) {
                    line(depth, name, off, n, std::to_string(v[0]) + " (" +
                                                  std::string(to_string(static_cast<SmpSynch>(v[0]))) + ")");
                } else {
                    line(depth, name, off, n, to_hex(v));
                }
                break;
            case tags::kSeqData:
                line(depth, name, off, n, v.empty() ? "(empty)" : to_hex(v));
                describe_members(depth + 1, off + (n - v.size()), v);
                break;
            default:
                line(depth, name, off, n, to_hex(v));
                note(depth, "WARNING: unknown ASDU tag " + hex_value(tag, 2));
                break;
        }
        if (tag == 0x81 || tag == 0x86 || tag == 0x88) {
            note(depth, "WARNING: " + name + " is not part of the reduced ASDU");
        }
    }

    void describe_members(int depth, std::size_t off, ByteView v) {
        if (schema_ == nullptr) return;
        if (v.size() != schema_->packed_width()) {
            note(depth, "WARNING: seqData is " + std::to_string(v.size()) + " octets, schema packs " +
                            std::to_string(schema_->packed_width()));
            return;
        }
        const auto values = unpack_seq_data(v, *schema_);
        std::size_t pos = off;
        for (std::size_t i = 0; i < values.size(); ++i) {
            const DatasetMember& m = schema_->members[i];
            const Decimal eng{values[i].raw + m.offset, m.scale_factor};
            std::string text = std::to_string(values[i].raw);
            if (m.scale_factor != 0 || m.offset != 0) text += " (" + eng.to_string() + ")";
            if (values[i].quality) {
                text += ", q=" + std::string(to_string(values[i].quality->validity));
                if (values[i].quality->test) text += "+test";
            }
            line(depth, m.name, pos, m.packed_width(), std::move(text));
            pos += m.packed_width();
        }
    }

    ByteView in_;
    const DatasetSchema* schema_;
    std::vector<DissectLine> lines_;
    bool stopped_ = false;
};

} // namespace

std::vector<DissectLine> dissect(ByteView octets) { return Dissector(octets, nullptr).run(); }

std::vector<DissectLine> dissect(ByteView octets, const DatasetSchema& schema) {
    return Dissector(octets, &schema).run();
}

std::string render_dissection(const std::vector<DissectLine>& lines, bool show_raw) {
    std::string out;
    for (const auto& l : lines) {
        out.append(static_cast<std::size_t>(l.depth) * 2, ' ');
        if (l.annotation) {
            out += l.value;
        } else {
            out += l.field;
            out += ": ";
            out += l.value;
            if (show_raw && !l.raw_hex.empty()) out += "  [" + l.raw_hex + "]";
        }
        out += '\n';
    }
    return out;
}

} // namespace redsv
