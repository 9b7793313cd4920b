#include "cli.hpp"

#include "redsv/analyzer.hpp"
#include "redsv/budget.hpp"
#include "redsv/codec.hpp"
#include "redsv/config.hpp"
#include "redsv/error.hpp"
#include "redsv/experiment.hpp"
#include "redsv/hex.hpp"
#include "redsv/source_sim.hpp"
#include "redsv/transport.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <condition_variable>
#include <fstream>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

namespace redsv::cli {

std::atomic<bool>& interrupt_flag() {
    static std::atomic<bool> flag{false};
    return flag;
}

namespace {

class UsageError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

double parse_number(std::string_view text, std::string_view what) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v) || v < 0) {
        throw UsageError(std::string(what) + ": cannot parse '" + std::string(text) + "'");
    }
    return v;
}

std::string_view split_suffix(std::string_view text, std::string_view& suffix) {
    std::size_t i = text.size();
    while (i > 0 && std::isalpha(static_cast<unsigned char>(text[i - 1]))) --i;
    suffix = text.substr(i);
    return text.substr(0, i);
}

} // namespace

std::chrono::nanoseconds parse_duration(std::string_view text) {
    std::string_view unit;
    const double v = parse_number(split_suffix(text, unit), "duration");
    double scale = 0;
    if (unit.empty() || unit == "s") scale = 1e9;
    else if (unit == "ms") scale = 1e6;
    else if (unit == "us") scale = 1e3;
    else if (unit == "ns") scale = 1;
    else if (unit == "m" || unit == "min") scale = 60e9;
    else throw UsageError("duration: unknown unit '" + std::string(unit) + "'");
    return std::chrono::nanoseconds(std::llround(v * scale));
}

std::uint64_t parse_rate(std::string_view text) {
    std::string_view unit;
    const double v = parse_number(split_suffix(text, unit), "rate");
    double scale = 0;
    if (unit.empty()) scale = 1;
    else if (unit == "k" || unit == "K") scale = 1e3;
    else if (unit == "M") scale = 1e6;
    else if (unit == "G") scale = 1e9;
    else throw UsageError("rate: unknown suffix '" + std::string(unit) + "'");
    return static_cast<std::uint64_t>(std::llround(v * scale));
}

namespace {

struct Streams {
    std::ostream& out;
    std::ostream& err;
};

struct EndpointOverrides {
    std::string mode;
    std::string address;
    int port = -1;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--mode", mode, "unicast or multicast (overrides the config)");
        cmd->add_option("--address", address, "destination or group address (overrides the config)");
        cmd->add_option("--port", port, "UDP port (overrides the config)")->check(CLI::Range(0, 65535));
    }

    void apply(transport::EndpointConfig& ep) const {
        if (!mode.empty()) ep.mode = transport::parse_mode(mode);
        if (!address.empty()) ep.address = address;
        if (port >= 0) ep.port = static_cast<std::uint16_t>(port);
    }
};

config::RunConfig load_config(const std::string& path) {
    if (path.empty()) return {};
    return config::load(path);
}

void write_record(std::ostream& os, ByteView datagram) {
    const char len[2] = {static_cast<char>(datagram.size() >> 8), static_cast<char>(datagram.size() & 0xFF)};
    os.write(len, 2);
    os.write(reinterpret_cast<const char*>(datagram.data()), static_cast<std::streamsize>(datagram.size()));
}

std::unique_ptr<std::ofstream> open_capture(const std::string& path) {
    if (path.empty()) return nullptr;
    auto f = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
    if (!*f) throw SvError(ErrorCode::ConfigError, "cannot write capture file " + path);
    return f;
}

// ---------------------------------------------------------------- publish

struct PublishArgs {
    std::string config;
    std::string duration = "1s";
    std::optional<std::uint64_t> frames;
    std::optional<double> rate_limit;
    std::string capture;
    bool dump = false;
    EndpointOverrides ep;
};

int cmd_publish(const PublishArgs& a, Streams io) {
    config::RunConfig cfg = load_config(a.config);
    a.ep.apply(cfg.endpoint);
    cfg.endpoint.validate();
    if (a.dump) {
        io.out << config::dump(cfg);
        return kOk;
    }
    const double rate = a.rate_limit ? *a.rate_limit : static_cast<double>(cfg.samples_per_second());
    if (!(rate > 0)) throw UsageError("--rate-limit must be positive");
    const std::uint64_t count =
        a.frames ? *a.frames
                 : static_cast<std::uint64_t>(std::llround(std::chrono::duration<double>(parse_duration(a.duration)).count() * rate));

    auto capture = open_capture(a.capture);
    const auto channels = cfg.effective_channels();
    transport::PublishOptions opts;
    opts.rate_hz = rate;
    opts.wrap_modulus = cfg.samples_per_second();
    opts.frame_count = count;
    opts.stop = &interrupt_flag();
    if (capture) opts.on_sent = [&](ByteView d) { write_record(*capture, d); };

    io.out << "publishing " << count << " frames at " << rate << " frames/s to " << transport::to_string(cfg.endpoint.mode)
           << ' ' << cfg.endpoint.address << ':' << cfg.endpoint.port << '\n';
    const auto state = transport::publish_stream(
        cfg.endpoint, cfg.frame_template(), cfg.schema,
        [&](std::uint64_t tick) {
            return sim::member_values(channels, cfg.schema, tick, cfg.points_per_period, cfg.seed, cfg.nominal_hz);
        },
        opts);
    io.out << transport::render(state);
    if (!state.ok()) {
        io.err << "error: " << state.error_message << '\n';
        return kRuntime;
    }
    return kOk;
}

// ---------------------------------------------------------------- subscribe

struct SubscribeArgs {
    std::string config;
    std::string duration;
    std::string stats_interval = "1s";
    std::optional<std::uint64_t> frames;
    std::string capture;
    bool dump = false;
    EndpointOverrides ep;
};

int cmd_subscribe(const SubscribeArgs& a, Streams io) {
    config::RunConfig cfg = load_config(a.config);
    a.ep.apply(cfg.endpoint);
    cfg.endpoint.validate();
    if (a.dump) {
        io.out << config::dump(cfg);
        return kOk;
    }
    const auto interval = parse_duration(a.stats_interval);
    if (interval.count() <= 0) throw UsageError("--stats-interval must be positive");
    std::optional<transport::Clock::time_point> until;
    if (!a.duration.empty()) until = transport::Clock::now() + parse_duration(a.duration);
    auto capture = open_capture(a.capture);

    transport::UdpReceiver receiver(cfg.endpoint);
    io.out << "listening on " << transport::to_string(cfg.endpoint.mode) << ' ' << cfg.endpoint.address << ':'
           << receiver.local_port() << '\n';

    analyzer::Options opts;
    opts.wrap_modulus = cfg.samples_per_second();
    opts.keep_accepted = false;
    analyzer::Analyzer an(cfg.schema, opts);

    std::mutex mu;
    std::condition_variable cv;
    bool finished = false;
    std::uint64_t datagrams = 0;
    const auto start = transport::Clock::now();

    auto done = [&] {
        if (interrupt_flag().load()) return true;
        if (until && transport::Clock::now() >= *until) return true;
        std::lock_guard lock(mu);
        return a.frames.has_value() && datagrams >= *a.frames;
    };

    std::optional<SvError> failure;
    std::thread rx([&] {
        try {
            transport::subscribe(
                receiver,
                [&](ByteView d, transport::Clock::time_point t) {
                    std::lock_guard lock(mu);
                    ++datagrams;
                    if (capture) write_record(*capture, d);
                    return an.ingest(d, t - start);
                },
                done);
        } catch (const SvError& e) {
            failure = e;
        }
        std::lock_guard lock(mu);
        finished = true;
        cv.notify_all();
    });

    {
        std::unique_lock lock(mu);
        while (!finished) {
            if (cv.wait_for(lock, interval, [&] { return finished; })) break;
            io.out << "--- " << datagrams << " datagrams\n" << analyzer::render(an.report()) << std::flush;
        }
    }
    rx.join();
    if (failure) {
        io.err << "error: " << failure->what() << '\n';
        return kRuntime;
    }
    io.out << "=== final: " << datagrams << " datagrams\n" << analyzer::render(an.report());
    return kOk;
}

// ---------------------------------------------------------------- decode

struct DecodeArgs {
    std::string file;
    std::string format = "auto";
    std::string config;
    bool raw_octets = false;
};

bool looks_like_hex(const std::string& data) {
    for (const unsigned char c : data) {
        if (!(std::isxdigit(c) || std::isspace(c) || c == 'x' || c == 'X')) return false;
    }
    return true;
}

std::vector<Bytes> split_hex_blocks(const std::string& text) {
    std::vector<Bytes> out;
    std::istringstream in(text);
    std::string line;
    std::string block;
    auto flush = [&] {
        if (block.find_first_not_of(" \t\r\n") != std::string::npos) out.push_back(parse_hex(block));
        block.clear();
    };
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) flush();
        else block += line + '\n';
    }
    flush();
    return out;
}

int cmd_decode(const DecodeArgs& a, Streams io) {
    std::ifstream in(a.file, std::ios::binary);
    if (!in) throw SvError(ErrorCode::ConfigError, "cannot read " + a.file);
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string data = ss.str();

    std::optional<DatasetSchema> schema;
    if (!a.config.empty()) schema = config::load(a.config).schema;

    std::string format = a.format;
    if (format == "auto") format = looks_like_hex(data) ? "hex" : "raw";

    std::vector<Bytes> datagrams;
    std::uint64_t warnings = 0;
    std::string trailer;
    if (format == "hex") {
        try {
            datagrams = split_hex_blocks(data);
        } catch (const SvError& e) {
            throw SvError(ErrorCode::ConfigError, a.file + ": " + e.what());
        }
    } else {
        std::size_t off = 0;
        while (off + 2 <= data.size()) {
            const std::size_t len = (static_cast<unsigned char>(data[off]) << 8) | static_cast<unsigned char>(data[off + 1]);
            off += 2;
            const std::size_t take = std::min(len, data.size() - off);
            datagrams.emplace_back(data.begin() + static_cast<std::ptrdiff_t>(off),
                                   data.begin() + static_cast<std::ptrdiff_t>(off + take));
            if (take < len) {
                trailer = "WARNING: last record declares " + std::to_string(len) + " octets, " + std::to_string(take) +
                          " present";
            }
            off += take;
        }
        if (off < data.size()) trailer = "WARNING: " + std::to_string(data.size() - off) + " stray octet(s) at end of capture";
    }

    for (std::size_t i = 0; i < datagrams.size(); ++i) {
        const auto lines = schema ? dissect(datagrams[i], *schema) : dissect(datagrams[i]);
        for (const auto& l : lines) warnings += l.annotation ? 1 : 0;
        io.out << "datagram " << (i + 1) << " (" << datagrams[i].size() << " octets)\n"
               << render_dissection(lines, a.raw_octets);
    }
    if (!trailer.empty()) {
        io.out << trailer << '\n';
        ++warnings;
    }
    io.out << datagrams.size() << " datagrams, " << warnings << " warnings\n";
    return kOk;
}

// ---------------------------------------------------------------- budget

struct BudgetArgs {
    std::uint64_t payload = 0;
    std::uint32_t hz = 50;
    std::uint32_t points = 80;
    std::string capacity = "30M";
    bool ipv6 = false;
};

int cmd_budget(const BudgetArgs& a, Streams io) {
    budget::BudgetReport report;
    try {
        report = budget::project_bitrate(a.payload, a.hz, a.points, parse_rate(a.capacity),
                                         a.ipv6 ? budget::kIpv6UdpOverhead : budget::kIpv4UdpOverhead);
    } catch (const SvError& e) {
        if (e.code() == ErrorCode::UnsupportedRate || e.code() == ErrorCode::InvalidArgument) throw UsageError(e.what());
        throw;
    }
    io.out << budget::render(report);
    io.out << "sample interval  " << format_3sig(budget::sample_interval(a.hz, a.points).to_double() * 1e6) << " us\n";
    return report.fits ? kOk : kOverBudget;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
    std::string config;
    double loss = 0.0;
    double reorder = 0.0;
    std::string jitter = "0";
    std::string latency = "0";
    std::uint64_t frames = 4000;
    std::uint64_t seed = 42;
    std::uint32_t invalid_every = 0;
    bool dump = false;
};

int cmd_simulate(const SimulateArgs& a, Streams io) {
    config::RunConfig cfg = load_config(a.config);
    if (a.dump) {
        io.out << config::dump(cfg);
        return kOk;
    }
    if (a.invalid_every != 0) {
        bool any_quality = false;
        for (const auto& m : cfg.schema.members) any_quality = any_quality || m.include_quality;
        if (!any_quality) throw UsageError("--invalid-every needs a schema member with a quality slot");
        cfg.channels = cfg.effective_channels();
        for (auto& c : cfg.channels) c.quality_profile.invalid_every = a.invalid_every;
    }
    netsim::ChannelSpec ch;
    ch.loss_probability = a.loss;
    ch.reorder_probability = a.reorder;
    ch.jitter = parse_duration(a.jitter);
    ch.base_latency = parse_duration(a.latency);
    ch.seed = a.seed;
    try {
        ch.validate();
    } catch (const SvError& e) {
        throw UsageError(e.what());
    }
    const auto result = experiment::run(cfg, ch, a.frames);
    io.out << experiment::render(result, ch);
    return kOk;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    Streams io{out, err};
    CLI::App app{"Reduced IEC 61850-9-2 sampled-value toolkit", "redsv"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every command");

    PublishArgs pub;
    auto* p = app.add_subcommand("publish", "Stream sampled values over UDP");
    p->add_option("--config", pub.config, "run configuration file")->required();
    p->add_option("--duration", pub.duration, "how long to publish, e.g. 5s");
    p->add_option("--frames", pub.frames, "exact number of frames (overrides --duration)");
    p->add_option("--rate-limit", pub.rate_limit, "frames per second instead of the sample rate");
    p->add_option("--capture", pub.capture, "also write sent datagrams to a length-prefixed file");
    p->add_flag("--dump-config", pub.dump, "print the effective configuration and exit");
    pub.ep.add_to(p);

    SubscribeArgs sub;
    auto* s = app.add_subcommand("subscribe", "Receive and analyze a sampled-value stream");
    s->add_option("--config", sub.config, "run configuration file (schema and endpoint)");
    s->add_option("--duration", sub.duration, "stop after this long");
    s->add_option("--frames", sub.frames, "stop after this many datagrams");
    s->add_option("--stats-interval", sub.stats_interval, "period of the running report");
    s->add_option("--capture", sub.capture, "write received datagrams to a length-prefixed file");
    s->add_flag("--dump-config", sub.dump, "print the effective configuration and exit");
    sub.ep.add_to(s);

    DecodeArgs dec;
    auto* d = app.add_subcommand("decode", "Dissect captured frames");
    d->add_option("file", dec.file, "hex text or length-prefixed raw capture")->required();
    d->add_option("--format", dec.format, "auto, hex or raw")->check(CLI::IsMember({"auto", "hex", "raw"}));
    d->add_option("--config", dec.config, "configuration whose schema splits seqData");
    d->add_flag("--show-octets", dec.raw_octets, "append the raw octets of every field");

    BudgetArgs bud;
    auto* b = app.add_subcommand("budget", "Project the bit rate of a stream");
    b->add_option("--payload", bud.payload, "frame octets before UDP/IP/Ethernet overhead")->required();
    b->add_option("--hz", bud.hz, "nominal power frequency");
    b->add_option("--points", bud.points, "samples per period (80 or 256)");
    b->add_option("--capacity", bud.capacity, "link capacity, e.g. 30M");
    b->add_flag("--ipv6", bud.ipv6, "use IPv6 header overhead");

    SimulateArgs sim_args;
    auto* m = app.add_subcommand("simulate", "Virtual-time run through a lossy channel");
    m->add_option("--config", sim_args.config, "run configuration file");
    m->add_option("--loss", sim_args.loss, "drop probability");
    m->add_option("--reorder", sim_args.reorder, "reorder probability");
    m->add_option("--jitter", sim_args.jitter, "uniform jitter bound, e.g. 50us");
    m->add_option("--latency", sim_args.latency, "base latency, e.g. 2ms");
    m->add_option("--frames", sim_args.frames, "frames to send");
    m->add_option("--seed", sim_args.seed, "channel seed");
    m->add_option("--invalid-every", sim_args.invalid_every, "mark every n-th sample invalid");
    m->add_flag("--dump-config", sim_args.dump, "print the effective configuration and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        const auto* cmd = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
        err << cmd->help();
        return kUsage;
    }

    try {
        if (*p) return cmd_publish(pub, io);
        if (*s) return cmd_subscribe(sub, io);
        if (*d) return cmd_decode(dec, io);
        if (*b) return cmd_budget(bud, io);
        if (*m) return cmd_simulate(sim_args, io);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const SvError& e) {
        err << "error: " << e.what() << '\n';
        const bool config_problem = e.code() == ErrorCode::ConfigError || e.code() == ErrorCode::InvalidArgument;
        return config_problem ? kUsage : kRuntime;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kRuntime;
    }
    return kUsage;
}

} // namespace redsv::cli
