// Prints one PASS/FAIL line per acceptance criterion; exits non-zero if any fail.

#include "golden.hpp"

#include "redsv/analyzer.hpp"
#include "redsv/ber.hpp"
#include "redsv/budget.hpp"
#include "redsv/codec.hpp"
#include "redsv/config.hpp"
#include "redsv/experiment.hpp"
#include "redsv/source_sim.hpp"
#include "redsv/transport.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <functional>
#include <mutex>
#include <random>
#include <string>
#include <thread>

using namespace redsv;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail) {
    std::printf("%s %d %s: %s\n", ok ? "PASS" : "FAIL", id, name, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

double ms_since(Clock::time_point t0) { return std::chrono::duration<double, std::milli>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), f, args...);
    return buf;
}

SvFrame table_frame() {
    SvFrame f;
    f.dst_mac = parse_mac("18:cc:18:8a:bc:db");
    f.src_mac = parse_mac("b8:27:eb:47:1f:d7");
    f.vlan = VlanTag::from_tci(0x8000);
    f.appid = 0x4000;
    Asdu a;
    a.sv_id = "xxxxMUnn01";
    a.smp_cnt = 1;
    a.conf_rev = 1;
    const MemberValue v[] = {{0x1111, {}}, {0, {}}, {0, {}}, {0, {}}};
    a.seq_data = pack_seq_data(v, reference_schema());
    f.apdu.asdus.push_back(a);
    return f;
}

void budget_reproduction() {
    const auto t0 = Clock::now();
    const auto r = budget::project_bitrate(84, 50, 80, 30'000'000);
    const double ms = ms_since(t0);
    const bool ok = r.wire_octets == 126 && r.bits_per_frame() == 1008 && r.bits_per_second == 4'032'000 && r.fits &&
                    ms < 1.0;
    report(1, "budget", ok,
           fmt("%llu octets, %llu bits, %llu bps, fits=%d, %.4f ms", (unsigned long long)r.wire_octets,
               (unsigned long long)r.bits_per_frame(), (unsigned long long)r.bits_per_second, int(r.fits), ms));
}

void timing_reproduction() {
    const Rational us(1'000'000);
    const auto a = budget::sample_interval(50, 80) * us;
    const auto b = budget::sample_interval(50, 256) * us;
    const bool ok = a == Rational(250) && b == Rational(78125, 1000);
    report(2, "timing", ok,
           fmt("50Hz/80 = %lld/%lld us, 50Hz/256 = %lld/%lld us", (long long)a.num(), (long long)a.den(),
               (long long)b.num(), (long long)b.den()));
}

void golden_frame() {
    const SvFrame f = table_frame();
    const Bytes octets = encode_frame(f, reference_schema());
    std::vector<golden::Node> nodes;
    const bool walked = golden::walk(octets, 26, octets.size(), 0, nodes);
    std::vector<std::uint8_t> tags;
    bool lengths = walked;
    for (const auto& n : nodes) tags.push_back(n.tag);
    if (walked && !nodes.empty()) lengths = nodes.front().offset + 2 + nodes.front().length == octets.size();
    const bool header = golden::be16(octets, 12) == 0x8100 && golden::be16(octets, 16) == 0x88ba &&
                        golden::be16(octets, 18) == 0x4000 && golden::be16(octets, 20) == octets.size() - 18;
    const std::vector<std::uint8_t> expect = {0x60, 0x80, 0xa2, 0x30, 0x80, 0x82, 0x83, 0x84, 0x85, 0x87};
    const auto lenient = decode_frame(octets, DecodeMode::Lenient);
    const bool ok = octets.size() == 86 && octets == golden::reference_frame() && lengths && header && tags == expect &&
                    lenient.frame == f && lenient.warnings.empty();
    report(3, "golden frame", ok,
           fmt("%zu octets, %zu TLVs walked, tags %s, lenient decode %s", octets.size(), nodes.size(),
               tags == expect ? "match" : "differ", lenient.frame == f ? "identical" : "differs"));
}

void round_trip() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(4);
    int frame_ok = 0;
    for (int i = 0; i < 1000; ++i) {
        DatasetSchema s;
        const int n = 1 + static_cast<int>(rng() % 2);
        for (int k = 0; k < n; ++k) {
            s.members.push_back({"TMGF1.MagFld.a" + std::to_string(k) + ".v", rng() % 2 ? 4u : 2u, true, 0, 0,
                                 rng() % 2 == 0});
        }
        SvFrame f;
        for (auto& b : f.dst_mac) b = static_cast<std::uint8_t>(rng());
        f.appid = static_cast<std::uint16_t>(rng());
        f.vlan = VlanTag::from_tci(static_cast<std::uint16_t>(rng()));
        Asdu a;
        a.sv_id = "MU" + std::to_string(rng() % 100000);
        a.smp_cnt = static_cast<std::uint16_t>(rng() % 4000);
        a.conf_rev = static_cast<std::uint32_t>(rng());
        a.refr_tm = {static_cast<std::uint32_t>(rng()), static_cast<std::uint32_t>(rng() & 0xffffff), 0};
        a.smp_synch = static_cast<SmpSynch>(rng() % 3);
        std::vector<MemberValue> v;
        for (const auto& m : s.members) {
            const std::int64_t lim = m.width == 2 ? 32768 : 2147483648LL;
            std::optional<Quality> q;
            if (m.include_quality) q = Quality{static_cast<Validity>(rng() % 3), rng() % 2 == 0};
            v.push_back({static_cast<std::int64_t>(rng() % (2 * lim)) - lim, q});
        }
        a.seq_data = pack_seq_data(v, s);
        f.apdu.asdus.push_back(a);
        if (decode_frame(encode_frame(f, s), DecodeMode::Strict).frame == f) ++frame_ok;
    }
    int tlv_ok = 0;
    for (int i = 0; i < 10000; ++i) {
        Bytes value(rng() % 700);
        for (auto& b : value) b = static_cast<std::uint8_t>(rng());
        const auto tag = static_cast<std::uint8_t>(rng());
        const Bytes enc = ber::encode_tlv(tag, value);
        const auto back = ber::decode_tlv(enc, 0);
        if (back.tag == tag && back.next == enc.size() &&
            std::equal(back.value.begin(), back.value.end(), value.begin(), value.end())) {
            ++tlv_ok;
        }
    }
    const double ms = ms_since(t0);
    report(4, "round trip", frame_ok == 1000 && tlv_ok == 10000 && ms < 10000,
           fmt("%d/1000 frames, %d/10000 TLVs, %.0f ms", frame_ok, tlv_ok, ms));
}

void constraints() {
    DatasetSchema two{{{"A.x.v", 4, true, 0, 0, false}, {"A.y.v", 4, true, 0, 0, false}}};
    DatasetSchema three = two;
    three.members.push_back({"A.z.v", 4, true, 0, 0, false});
    const auto ok1 = budget::validate_constraints(1, two);
    const auto asdus = budget::validate_constraints(2, two);
    const auto wide = budget::validate_constraints(1, three);
    const bool ok = ok1.empty() && asdus.size() == 1 && asdus[0].rule == budget::Rule::AsduCountExceeded &&
                    wide.size() == 1 && wide[0].rule == budget::Rule::DatasetTooWide;
    report(5, "constraints", ok,
           fmt("(1,2) -> %zu, (2,2) -> %s, (1,3) -> %s", ok1.size(),
               asdus.empty() ? "none" : asdus[0].to_string().c_str(), wide.empty() ? "none" : wide[0].to_string().c_str()));
}

netsim::ChannelSpec lossy_channel() {
    netsim::ChannelSpec ch;
    ch.loss_probability = 0.01;
    ch.seed = 42;
    return ch;
}

std::string loss_experiment() {
    const auto t0 = Clock::now();
    const auto r = experiment::run(config::RunConfig{}, lossy_channel(), 100'000);
    const double ms = ms_since(t0);
    const auto& s = r.stats;
    const bool ok = s.loss_rate >= 0.007 && s.loss_rate <= 0.013 && s.received + s.lost == 100'000 && ms < 30000;
    report(6, "loss experiment", ok,
           fmt("loss_rate %.6f, received %llu + lost %llu = %llu, %.0f ms", s.loss_rate,
               (unsigned long long)s.received, (unsigned long long)s.lost,
               (unsigned long long)(s.received + s.lost), ms));
    return experiment::render(r, lossy_channel());
}

void loopback() {
    constexpr std::uint64_t kFrames = 20'000;  // 5 s at 4000 SPS
    transport::EndpointConfig ep;
    ep.mode = transport::Mode::Unicast;
    ep.address = "127.0.0.1";
    ep.port = 0;

    try {
        transport::UdpReceiver rx(ep);
        ep.port = rx.local_port();

        analyzer::Options opts;
        opts.wrap_modulus = 4000;
        opts.initial_expected = 0;
        opts.keep_accepted = false;
        analyzer::Analyzer an(reference_schema(), opts);
        std::mutex mu;
        std::atomic<bool> publishing{true};
        Clock::time_point quiet_since{};
        const auto start = Clock::now();

        std::thread th([&] {
            transport::subscribe(
                rx,
                [&](ByteView d, Clock::time_point t) {
                    std::lock_guard lock(mu);
                    return an.ingest(d, t - start);
                },
                [&] {
                    if (publishing) return false;
                    if (quiet_since == Clock::time_point{}) quiet_since = Clock::now();
                    return Clock::now() - quiet_since > std::chrono::milliseconds(200);
                },
                std::chrono::milliseconds(5));
        });

        const config::RunConfig cfg;
        const auto channels = cfg.effective_channels();
        transport::PublishOptions po;
        po.rate_hz = 4000;
        po.wrap_modulus = 4000;
        po.frame_count = kFrames;
        const auto state = transport::publish_stream(
            ep, cfg.frame_template(), cfg.schema,
            [&](std::uint64_t tick) { return sim::member_values(channels, cfg.schema, tick, 80, 1); }, po);
        publishing = false;
        th.join();

        std::lock_guard lock(mu);
        an.end_of_stream(static_cast<std::uint16_t>(state.ticks % 4000));
        const auto s = an.report();
        const double delivery = static_cast<double>(s.received) / static_cast<double>(kFrames);
        const double miss = static_cast<double>(state.deadline_misses) / static_cast<double>(kFrames);
        const bool continuity = s.out_of_order == 0 && s.received + s.lost == state.ticks && state.smp_cnt == 0;
        const bool ok = state.ok() && delivery >= 0.99 && continuity && miss <= 0.01 &&
                        state.mean_send_interval_us >= 240 && state.mean_send_interval_us <= 260;
        report(7, "loopback", ok,
               fmt("delivered %llu/%llu (%.2f%%), lost %llu, out_of_order %llu, deadline_misses %llu (%.2f%%), "
                   "mean interval %.1f us%s",
                   (unsigned long long)s.received, (unsigned long long)kFrames, 100 * delivery,
                   (unsigned long long)s.lost, (unsigned long long)s.out_of_order,
                   (unsigned long long)state.deadline_misses, 100 * miss, state.mean_send_interval_us,
                   state.ok() ? "" : (", error " + state.error_message).c_str()));
    } catch (const std::exception& e) {
        report(7, "loopback", false, e.what());
    }
}

void quality_policy() {
    config::RunConfig cfg;
    cfg.schema = DatasetSchema{{{"TMGF1.MagFld.intMag.i", 4, true, 0, 0, true}}};
    sim::ChannelSpec c;
    c.quality_profile = sim::QualityProfile::invalid_every_nth(10);
    cfg.channels = {c};
    const auto r = experiment::run(cfg, netsim::ChannelSpec{}, 1000, true);
    const bool ok = r.stats.quality_discarded == 100 && r.accepted.size() == 900 && r.stats.accepted == 900;
    report(8, "quality policy", ok,
           fmt("quality_discarded %llu, accepted %zu", (unsigned long long)r.stats.quality_discarded,
               r.accepted.size()));
}

void determinism(const std::string& first) {
    const std::string second = experiment::render(experiment::run(config::RunConfig{}, lossy_channel(), 100'000),
                                                  lossy_channel());
    report(9, "determinism", first == second && !first.empty(),
           fmt("%zu-octet reports %s", first.size(), first == second ? "byte-identical" : "differ"));
}

} // namespace

int main() {
    budget_reproduction();
    timing_reproduction();
    golden_frame();
    round_trip();
    constraints();
    const std::string stats = loss_experiment();
    loopback();
    quality_policy();
    determinism(stats);
    std::printf("%d of 9 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
