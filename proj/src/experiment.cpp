#include "redsv/experiment.hpp"

#include "redsv/source_sim.hpp"

#include <cstdio>

namespace redsv::experiment {

Result run(const config::RunConfig& cfg, const netsim::ChannelSpec& channel_spec, std::uint64_t frames,
           bool keep_accepted) {
    const std::uint32_t wrap = cfg.samples_per_second();
    analyzer::Options opts;
    opts.wrap_modulus = wrap;
    opts.initial_expected = 0;
    opts.keep_accepted = keep_accepted;
    analyzer::Analyzer an(cfg.schema, opts);
    netsim::Channel channel(channel_spec);

    const auto channels = cfg.effective_channels();
    const sim::VirtualClock clock{std::chrono::nanoseconds{0}, cfg.nominal_hz};
    SvFrame frame = cfg.frame_template();
    Asdu& asdu = frame.apdu.asdus.front();

    auto deliver = [&](std::vector<netsim::Delivery> due) {
        for (const auto& d : due) an.ingest(d.payload, d.time);
    };

    for (std::uint64_t k = 0; k < frames; ++k) {
        const auto send_time = clock.at(k, cfg.points_per_period);
        deliver(channel.drain(send_time));
        asdu.smp_cnt = static_cast<std::uint16_t>(k % wrap);
        asdu.refr_tm = UtcTimestamp::from_nanoseconds(send_time);
        const auto values = sim::member_values(channels, cfg.schema, k, cfg.points_per_period, cfg.seed, cfg.nominal_hz);
        asdu.seq_data = pack_seq_data(values, cfg.schema);
        channel.transmit(encode_frame(frame, cfg.schema), send_time);
    }
    deliver(channel.drain_all());
    an.end_of_stream(static_cast<std::uint16_t>(frames % wrap));

    Result r;
    r.frames_sent = frames;
    r.dropped = channel.dropped();
    r.reordered = channel.reordered();
    r.stats = an.report();
    r.accepted = an.accepted();
    return r;
}

std::string render(const Result& r, const netsim::ChannelSpec& channel) {
    std::string out = analyzer::render(r.stats);
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "frames_sent           %llu\n"
                  "channel_dropped       %llu\n"
                  "channel_reordered     %llu\n"
                  "injected_loss         %.6f\n"
                  "measured_loss         %.6f\n"
                  "accounting            %s\n",
                  static_cast<unsigned long long>(r.frames_sent), static_cast<unsigned long long>(r.dropped),
                  static_cast<unsigned long long>(r.reordered), channel.loss_probability, r.stats.loss_rate,
                  r.stats.received + r.stats.lost == r.frames_sent ? "received + lost == frames_sent"
                                                                   : "received + lost != frames_sent");
    return out + buf;
}

} // namespace redsv::experiment
