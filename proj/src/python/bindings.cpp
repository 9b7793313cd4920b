#include "redsv/analyzer.hpp"
#include "redsv/ber.hpp"
#include "redsv/budget.hpp"
#include "redsv/codec.hpp"
#include "redsv/config.hpp"
#include "redsv/error.hpp"
#include "redsv/experiment.hpp"
#include "redsv/model.hpp"
#include "redsv/source_sim.hpp"
#include "redsv/transport.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace redsv;

namespace {

ByteView view(const py::bytes& b) {
    char* data = nullptr;
    Py_ssize_t len = 0;
    PyBytes_AsStringAndSize(b.ptr(), &data, &len);
    return {reinterpret_cast<const std::uint8_t*>(data), static_cast<std::size_t>(len)};
}

py::bytes to_bytes(ByteView b) { return {reinterpret_cast<const char*>(b.data()), b.size()}; }

py::object quality_obj(const std::optional<Quality>& q) {
    if (!q) return py::none();
    return py::make_tuple(std::string(to_string(q->validity)), q->test);
}

Validity parse_validity(const std::string& s) {
    if (s == "good") return Validity::Good;
    if (s == "invalid") return Validity::Invalid;
    if (s == "questionable") return Validity::Questionable;
    throw SvError(ErrorCode::InvalidArgument, "validity must be good, invalid or questionable");
}

// Accepts raw ints or (raw, validity[, test]) tuples.
std::vector<MemberValue> member_values(const py::sequence& seq) {
    std::vector<MemberValue> out;
    for (const auto& item : seq) {
        MemberValue v;
        if (py::isinstance<py::tuple>(item)) {
            const auto t = item.cast<py::tuple>();
            v.raw = t[0].cast<std::int64_t>();
            if (t.size() > 1 && !t[1].is_none()) {
                v.quality = Quality{parse_validity(t[1].cast<std::string>()), t.size() > 2 && t[2].cast<bool>()};
            }
        } else {
            v.raw = item.cast<std::int64_t>();
        }
        out.push_back(v);
    }
    return out;
}

py::dict stats_dict(const analyzer::LinkStats& s) {
    py::dict d;
    d["received"] = s.received;
    d["decode_failures"] = s.decode_failures;
    d["lost"] = s.lost;
    d["out_of_order"] = s.out_of_order;
    d["quality_discarded"] = s.quality_discarded;
    d["accepted"] = s.accepted;
    d["loss_rate"] = s.loss_rate;
    d["inter_arrival_mean_us"] = s.inter_arrival_mean_us;
    d["inter_arrival_stddev_us"] = s.inter_arrival_stddev_us;
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Reduced IEC 61850-9-2 sampled-value codec, budget and link simulation";

    static py::exception<SvError> sv_error(m, "SvError", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const SvError& e) {
            // args: (message, code name)
            PyErr_SetObject(sv_error.ptr(), py::make_tuple(e.what(), std::string(to_string(e.code()))).ptr());
        }
    });

    // BER
    m.def("encode_tlv", [](std::uint8_t tag, const py::bytes& value) { return to_bytes(ber::encode_tlv(tag, view(value))); },
          py::arg("tag"), py::arg("value"));
    m.def(
        "decode_tlv",
        [](const py::bytes& buf, std::size_t cursor) {
            const auto v = ber::decode_tlv(view(buf), cursor);
            return py::make_tuple(v.tag, to_bytes(v.value), v.next);
        },
        py::arg("buffer"), py::arg("cursor") = 0, "Returns (tag, value, next_offset).");

    // Scaling
    m.def(
        "to_engineering",
        [](std::int32_t raw, std::int32_t offset, std::int8_t sf) { return to_engineering({raw, offset, sf}).to_string(); },
        py::arg("raw"), py::arg("offset") = 0, py::arg("scale_factor") = 0);
    m.def(
        "from_engineering",
        [](const std::string& x, std::int8_t sf, std::int32_t offset, std::size_t width, bool is_signed) {
            return from_engineering(Decimal::parse(x), sf, offset, width, is_signed);
        },
        py::arg("value"), py::arg("scale_factor"), py::arg("offset") = 0, py::arg("width") = 4,
        py::arg("signed") = true, "Value is a decimal string, e.g. \"22.505\"; rounds half to even.");

    py::class_<DatasetMember>(m, "DatasetMember")
        .def(py::init([](std::string name, std::size_t width, bool is_signed, std::int8_t sf, std::int32_t offset,
                         bool quality) { return DatasetMember{std::move(name), width, is_signed, sf, offset, quality}; }),
             py::arg("name"), py::arg("width") = 4, py::arg("signed") = true, py::arg("scale_factor") = 0,
             py::arg("offset") = 0, py::arg("quality") = false)
        .def_readwrite("name", &DatasetMember::name)
        .def_readwrite("width", &DatasetMember::width)
        .def_readwrite("signed", &DatasetMember::is_signed)
        .def_readwrite("scale_factor", &DatasetMember::scale_factor)
        .def_readwrite("offset", &DatasetMember::offset)
        .def_readwrite("quality", &DatasetMember::include_quality)
        .def("__repr__", [](const DatasetMember& d) { return "<DatasetMember " + d.name + ">"; });

    py::class_<DatasetSchema>(m, "DatasetSchema")
        .def(py::init([](std::vector<DatasetMember> members) {
                 DatasetSchema s{std::move(members)};
                 s.validate();
                 return s;
             }),
             py::arg("members"))
        .def_readwrite("members", &DatasetSchema::members)
        .def_property_readonly("packed_width", &DatasetSchema::packed_width)
        .def_property_readonly("attribute_count", &DatasetSchema::top_level_attribute_count);
    m.def("reference_schema", [] { return reference_schema(); });

    m.def(
        "pack_seq_data",
        [](const py::sequence& values, const DatasetSchema& s) { return to_bytes(pack_seq_data(member_values(values), s)); },
        py::arg("values"), py::arg("schema"), "Values are ints or (int, validity, test) tuples.");
    m.def(
        "unpack_seq_data",
        [](const py::bytes& data, const DatasetSchema& s) {
            py::list out;
            for (const auto& v : unpack_seq_data(view(data), s)) out.append(py::make_tuple(v.raw, quality_obj(v.quality)));
            return out;
        },
        py::arg("data"), py::arg("schema"));

    // Frames
    py::class_<Asdu>(m, "Asdu")
        .def(py::init<>())
        .def_readwrite("sv_id", &Asdu::sv_id)
        .def_readwrite("smp_cnt", &Asdu::smp_cnt)
        .def_readwrite("conf_rev", &Asdu::conf_rev)
        .def_property(
            "refr_tm", [](const Asdu& a) { return py::make_tuple(a.refr_tm.seconds, a.refr_tm.fraction, a.refr_tm.time_quality); },
            [](Asdu& a, const py::tuple& t) {
                a.refr_tm = {t[0].cast<std::uint32_t>(), t[1].cast<std::uint32_t>(),
                             t.size() > 2 ? t[2].cast<std::uint8_t>() : std::uint8_t{0}};
            },
            "(seconds, 24-bit fraction, time quality)")
        .def_property(
            "smp_synch", [](const Asdu& a) { return static_cast<int>(a.smp_synch); },
            [](Asdu& a, int v) {
                if (v < 0 || v > 2) throw SvError(ErrorCode::InvalidArgument, "smp_synch must be 0, 1 or 2");
                a.smp_synch = static_cast<SmpSynch>(v);
            })
        .def_property(
            "seq_data", [](const Asdu& a) { return to_bytes(a.seq_data); },
            [](Asdu& a, const py::bytes& b) {
                const auto v = view(b);
                a.seq_data.assign(v.begin(), v.end());
            })
        .def("__eq__", [](const Asdu& a, const Asdu& b) { return a == b; });

    py::class_<SvFrame>(m, "SvFrame")
        .def(py::init<>())
        .def_property(
            "dst_mac", [](const SvFrame& f) { return to_string(f.dst_mac); },
            [](SvFrame& f, const std::string& s) { f.dst_mac = parse_mac(s); })
        .def_property(
            "src_mac", [](const SvFrame& f) { return to_string(f.src_mac); },
            [](SvFrame& f, const std::string& s) { f.src_mac = parse_mac(s); })
        .def_property(
            "vlan_tci", [](const SvFrame& f) { return f.vlan.tci(); },
            [](SvFrame& f, std::uint16_t tci) { f.vlan = VlanTag::from_tci(tci); })
        .def_readwrite("appid", &SvFrame::appid)
        .def_property(
            "asdus", [](const SvFrame& f) { return f.apdu.asdus; },
            [](SvFrame& f, std::vector<Asdu> a) { f.apdu.asdus = std::move(a); })
        .def("__eq__", [](const SvFrame& a, const SvFrame& b) { return a == b; });

    m.def(
        "encode_frame", [](const SvFrame& f, const DatasetSchema& s) { return to_bytes(encode_frame(f, s)); },
        py::arg("frame"), py::arg("schema") = reference_schema());
    m.def(
        "decode_frame",
        [](const py::bytes& octets, bool strict) {
            auto d = decode_frame(view(octets), strict ? DecodeMode::Strict : DecodeMode::Lenient);
            return py::make_tuple(std::move(d.frame), std::move(d.warnings));
        },
        py::arg("octets"), py::arg("strict") = true, "Returns (frame, warnings).");
    m.def(
        "dissect",
        [](const py::bytes& octets, std::optional<DatasetSchema> schema, bool show_octets) {
            const auto lines = schema ? dissect(view(octets), *schema) : dissect(view(octets));
            return render_dissection(lines, show_octets);
        },
        py::arg("octets"), py::arg("schema") = py::none(), py::arg("show_octets") = false);

    // Budget
    m.def(
        "project_bitrate",
        [](std::uint64_t payload, std::uint32_t hz, std::uint32_t points, std::uint64_t capacity, bool ipv6) {
            const auto r = budget::project_bitrate(payload, hz, points, capacity,
                                                   ipv6 ? budget::kIpv6UdpOverhead : budget::kIpv4UdpOverhead);
            py::dict d;
            d["payload_octets"] = r.payload_octets;
            d["wire_octets"] = r.wire_octets;
            d["bits_per_frame"] = r.bits_per_frame();
            d["samples_per_second"] = r.samples_per_second;
            d["bits_per_second"] = r.bits_per_second;
            d["capacity_bps"] = r.capacity_bps;
            d["fits"] = r.fits;
            d["margin_bps"] = r.margin_bps;
            d["report"] = budget::render(r);
            return d;
        },
        py::arg("payload_octets"), py::arg("nominal_hz") = 50, py::arg("points_per_period") = 80,
        py::arg("capacity_bps") = 30'000'000, py::arg("ipv6") = false);
    m.def(
        "sample_interval",
        [](std::uint32_t hz, std::uint32_t points) {
            const auto r = budget::sample_interval(hz, points);
            return py::module_::import("fractions").attr("Fraction")(r.num(), r.den());
        },
        py::arg("nominal_hz"), py::arg("points_per_period"), "Exact interval in seconds as a Fraction.");
    m.def(
        "validate_constraints",
        [](std::size_t asdu_count, const DatasetSchema& s) {
            std::vector<std::string> out;
            for (const auto& v : budget::validate_constraints(asdu_count, s)) out.push_back(v.to_string());
            return out;
        },
        py::arg("asdu_count"), py::arg("schema"));

    // Configuration
    py::class_<config::RunConfig>(m, "RunConfig")
        .def(py::init<>())
        .def_readwrite("sv_id", &config::RunConfig::sv_id)
        .def_readwrite("appid", &config::RunConfig::appid)
        .def_readwrite("schema", &config::RunConfig::schema)
        .def_readwrite("seed", &config::RunConfig::seed)
        .def_property_readonly("samples_per_second", &config::RunConfig::samples_per_second)
        .def("dump", [](const config::RunConfig& c) { return config::dump(c); })
        .def("__eq__", [](const config::RunConfig& a, const config::RunConfig& b) { return a == b; });
    m.def("parse_config", [](const std::string& text) { return config::parse(text); }, py::arg("text"));
    m.def("load_config", [](const std::string& path) { return config::load(path); }, py::arg("path"));

    // Analysis
    py::class_<analyzer::Analyzer>(m, "Analyzer")
        .def(py::init([](const DatasetSchema& s, std::uint32_t wrap, std::optional<std::uint16_t> initial) {
                 analyzer::Options o;
                 o.wrap_modulus = wrap;
                 o.initial_expected = initial;
                 return analyzer::Analyzer(s, o);
             }),
             py::arg("schema") = reference_schema(), py::arg("wrap_modulus") = 4000,
             py::arg("initial_expected") = py::none())
        .def(
            "ingest",
            [](analyzer::Analyzer& a, const py::bytes& d, std::int64_t arrival_ns) {
                return a.ingest(view(d), analyzer::Duration(arrival_ns));
            },
            py::arg("datagram"), py::arg("arrival_ns") = 0)
        .def("end_of_stream", &analyzer::Analyzer::end_of_stream, py::arg("next_smp_cnt"))
        .def("report", [](const analyzer::Analyzer& a) { return stats_dict(a.report()); })
        .def("render", [](const analyzer::Analyzer& a) { return analyzer::render(a.report()); })
        .def("accepted_counters", [](const analyzer::Analyzer& a) {
            std::vector<std::uint16_t> out;
            for (const auto& r : a.accepted()) out.push_back(r.smp_cnt);
            return out;
        });

    m.def(
        "simulate",
        [](const std::optional<config::RunConfig>& cfg, double loss, double reorder, std::int64_t jitter_ns,
           std::int64_t latency_ns, std::uint64_t frames, std::uint64_t seed) {
            netsim::ChannelSpec ch;
            ch.loss_probability = loss;
            ch.reorder_probability = reorder;
            ch.jitter = netsim::Duration(jitter_ns);
            ch.base_latency = netsim::Duration(latency_ns);
            ch.seed = seed;
            experiment::Result r;
            {
                py::gil_scoped_release release;
                r = experiment::run(cfg.value_or(config::RunConfig{}), ch, frames);
            }
            py::dict d = stats_dict(r.stats);
            d["frames_sent"] = r.frames_sent;
            d["channel_dropped"] = r.dropped;
            d["channel_reordered"] = r.reordered;
            d["report"] = experiment::render(r, ch);
            return d;
        },
        py::arg("config") = py::none(), py::arg("loss") = 0.0, py::arg("reorder") = 0.0, py::arg("jitter_ns") = 0,
        py::arg("latency_ns") = 0, py::arg("frames") = 4000, py::arg("seed") = 42);

    m.def(
        "publish",
        [](const config::RunConfig& cfg, std::uint64_t frames, std::optional<double> rate_hz) {
            const auto channels = cfg.effective_channels();
            transport::PublishOptions o;
            o.rate_hz = rate_hz.value_or(cfg.samples_per_second());
            o.wrap_modulus = cfg.samples_per_second();
            o.frame_count = frames;
            transport::PublisherState s;
            {
                py::gil_scoped_release release;
                s = transport::publish_stream(
                    cfg.endpoint, cfg.frame_template(), cfg.schema,
                    [&](std::uint64_t tick) {
                        return sim::member_values(channels, cfg.schema, tick, cfg.points_per_period, cfg.seed,
                                                  cfg.nominal_hz);
                    },
                    o);
            }
            if (s.error) throw SvError(*s.error, s.error_message);
            py::dict d;
            d["frames_sent"] = s.frames_sent;
            d["deadline_misses"] = s.deadline_misses;
            d["next_smp_cnt"] = s.smp_cnt;
            d["mean_send_interval_us"] = s.mean_send_interval_us;
            return d;
        },
        py::arg("config"), py::arg("frames"), py::arg("rate_hz") = py::none(),
        "Streams frames to the configured endpoint; blocks until done.");
}
