#include "redsv/config.hpp"

#include "redsv/budget.hpp"
#include "redsv/error.hpp"
#include "redsv/hex.hpp"

#include <charconv>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace redsv::config {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos - start)));
        if (pos == std::string_view::npos) return out;
        start = pos + 1;
    }
}

std::vector<std::string_view> words(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        const std::size_t start = i;
        while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
        if (i > start) out.push_back(s.substr(start, i - start));
    }
    return out;
}

template <typename T>
T parse_int(std::string_view text, const char* what) {
    std::int64_t v = 0;
    int base = 10;
    std::string_view digits = text;
    bool negative = false;
    if (!digits.empty() && digits.front() == '-') {
        negative = true;
        digits.remove_prefix(1);
    }
    if (digits.size() > 2 && digits[0] == '0' && (digits[1] == 'x' || digits[1] == 'X')) {
        base = 16;
        digits.remove_prefix(2);
    }
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v, base);
    if (digits.empty() || ec != std::errc{} || ptr != digits.data() + digits.size()) {
        throw SvError(ErrorCode::ConfigError, std::string(what) + ": not an integer: '" + std::string(text) + "'");
    }
    if (negative) v = -v;
    if (v < static_cast<std::int64_t>(std::numeric_limits<T>::min()) ||
        (v > 0 && static_cast<std::uint64_t>(v) > static_cast<std::uint64_t>(std::numeric_limits<T>::max()))) {
        throw SvError(ErrorCode::ConfigError, std::string(what) + ": out of range: " + std::string(text));
    }
    return static_cast<T>(v);
}

std::uint64_t parse_u64(std::string_view text, const char* what) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
        throw SvError(ErrorCode::ConfigError, std::string(what) + ": not an unsigned integer: '" + std::string(text) + "'");
    }
    return v;
}

double parse_double(std::string_view text, const char* what) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
        throw SvError(ErrorCode::ConfigError, std::string(what) + ": not a number: '" + std::string(text) + "'");
    }
    return v;
}

bool parse_flag(std::string_view text, std::string_view yes, std::string_view no, const char* what) {
    if (text == yes || text == "1" || text == "true") return true;
    if (text == no || text == "0" || text == "false") return false;
    throw SvError(ErrorCode::ConfigError, std::string(what) + ": expected " + std::string(yes) + " or " +
                                              std::string(no) + ", got '" + std::string(text) + "'");
}

std::string fmt_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

SmpSynch parse_synch(std::string_view text) {
    if (text == "none") return SmpSynch::None;
    if (text == "local") return SmpSynch::Local;
    if (text == "global") return SmpSynch::Global;
    throw SvError(ErrorCode::ConfigError, "smp_synch must be none, local or global");
}

std::string_view synch_name(SmpSynch s) {
    switch (s) {
        case SmpSynch::None: return "none";
        case SmpSynch::Local: return "local";
        case SmpSynch::Global: return "global";
    }
    return "none";
}

// member = name:width:signed|unsigned:scale_factor:offset:quality|none
DatasetMember parse_member(std::string_view value) {
    const auto f = split(value, ':');
    if (f.size() != 6) {
        throw SvError(ErrorCode::ConfigError, "member needs name:width:signed:scale_factor:offset:quality");
    }
    DatasetMember m;
    m.name = std::string(f[0]);
    if (m.name.empty()) throw SvError(ErrorCode::ConfigError, "member name is empty");
    m.width = parse_int<std::uint8_t>(f[1], "member width");
    m.is_signed = parse_flag(f[2], "signed", "unsigned", "member signedness");
    m.scale_factor = parse_int<std::int8_t>(f[3], "member scale_factor");
    m.offset = parse_int<std::int32_t>(f[4], "member offset");
    m.include_quality = parse_flag(f[5], "quality", "none", "member quality");
    return m;
}

// channel = LN kind key=value ...
sim::ChannelSpec parse_channel(std::string_view value) {
    const auto w = words(value);
    if (w.size() < 2) throw SvError(ErrorCode::ConfigError, "channel needs a logic node and a waveform");
    sim::ChannelSpec c;
    c.logic_node = std::string(w[0]);
    try {
        c.kind = sim::parse_wave_kind(w[1]);
    } catch (const SvError& e) {
        throw SvError(ErrorCode::ConfigError, e.what());
    }
    for (std::size_t i = 2; i < w.size(); ++i) {
        const auto eq = w[i].find('=');
        if (eq == std::string_view::npos) {
            throw SvError(ErrorCode::ConfigError, "channel option '" + std::string(w[i]) + "' is not key=value");
        }
        const auto k = w[i].substr(0, eq);
        const auto v = w[i].substr(eq + 1);
        if (k == "amplitude") c.amplitude = parse_double(v, "amplitude");
        else if (k == "frequency") c.frequency_hz = parse_double(v, "frequency");
        else if (k == "phase") c.phase_rad = parse_double(v, "phase");
        else if (k == "dc") c.dc_offset = parse_double(v, "dc");
        else if (k == "sigma") c.noise_sigma = parse_double(v, "sigma");
        else if (k == "invalid_every") c.quality_profile.invalid_every = parse_int<std::uint32_t>(v, "invalid_every");
        else throw SvError(ErrorCode::ConfigError, "unknown channel option '" + std::string(k) + "'");
    }
    return c;
}

class Parser {
public:
    Parser(std::string_view text, std::string_view origin) : text_(text), origin_(origin) {}

    RunConfig run() {
        std::size_t line_no = 0;
        std::size_t start = 0;
        bool members_seen = false;
        while (start <= text_.size()) {
            const auto nl = text_.find('\n', start);
            std::string_view line = text_.substr(start, nl == std::string_view::npos ? text_.npos : nl - start);
            start = nl == std::string_view::npos ? text_.size() + 1 : nl + 1;
            ++line_no;
            const auto hash = line.find('#');
            if (hash != std::string_view::npos) line = line.substr(0, hash);
            line = trim(line);
            if (line.empty()) continue;
            line_ = line_no;
            const auto eq = line.find('=');
            if (eq == std::string_view::npos) fail("expected key = value");
            const auto key = trim(line.substr(0, eq));
            const auto value = trim(line.substr(eq + 1));
            try {
                if (key == "member") {
                    if (!members_seen) cfg_.schema.members.clear();
                    members_seen = true;
                    cfg_.schema.members.push_back(parse_member(value));
                    schema_line_ = line_no;
                } else if (key == "channel") {
                    cfg_.channels.push_back(parse_channel(value));
                    channel_lines_.push_back(line_no);
                } else {
                    if (seen_.count(std::string(key)) != 0) fail("duplicate key '" + std::string(key) + "'");
                    seen_[std::string(key)] = line_no;
                    scalar(key, value);
                }
            } catch (const SvError& e) {
                if (e.code() == ErrorCode::ConfigError && strip_code(e).starts_with(origin_)) throw;
                fail(strip_code(e));
            }
        }
        validate();
        return cfg_;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const { fail_at(line_, msg); }

    [[noreturn]] void fail_at(std::size_t line, const std::string& msg) const {
        throw SvError(ErrorCode::ConfigError, std::string(origin_) + ":" + std::to_string(line) + ": " + msg);
    }

    static std::string strip_code(const SvError& e) {
        const std::string w = e.what();
        const auto colon = w.find(": ");
        return colon == std::string::npos ? w : w.substr(colon + 2);
    }

    std::size_t line_of(const char* key) const {
        const auto it = seen_.find(key);
        return it == seen_.end() ? 0 : it->second;
    }

    void scalar(std::string_view key, std::string_view value) {
        if (key == "sv_id") cfg_.sv_id = std::string(value);
        else if (key == "appid") cfg_.appid = parse_int<std::uint16_t>(value, "appid");
        else if (key == "conf_rev") cfg_.conf_rev = parse_int<std::uint32_t>(value, "conf_rev");
        else if (key == "dst_mac") cfg_.dst_mac = parse_mac(value);
        else if (key == "src_mac") cfg_.src_mac = parse_mac(value);
        else if (key == "vlan_priority") cfg_.vlan_priority = parse_int<std::uint8_t>(value, "vlan_priority");
        else if (key == "vlan_id") cfg_.vlan_id = parse_int<std::uint16_t>(value, "vlan_id");
        else if (key == "smp_synch") cfg_.smp_synch = parse_synch(value);
        else if (key == "nominal_hz") cfg_.nominal_hz = parse_int<std::uint32_t>(value, "nominal_hz");
        else if (key == "points_per_period") cfg_.points_per_period = parse_int<std::uint32_t>(value, "points_per_period");
        else if (key == "endpoint.mode") cfg_.endpoint.mode = transport::parse_mode(value);
        else if (key == "endpoint.address") cfg_.endpoint.address = std::string(value);
        else if (key == "endpoint.port") cfg_.endpoint.port = parse_int<std::uint16_t>(value, "endpoint.port");
        else if (key == "endpoint.ttl") cfg_.endpoint.multicast_ttl = parse_int<std::uint8_t>(value, "endpoint.ttl");
        else if (key == "endpoint.interface") cfg_.endpoint.bind_interface = std::string(value);
        else if (key == "seed") cfg_.seed = parse_u64(value, "seed");
        else fail("unknown key '" + std::string(key) + "'");
    }

    void check(bool ok, const char* key, const std::string& msg) const {
        if (!ok) fail_at(line_of(key), msg);
    }

    void validate() const {
        const auto& c = cfg_;
        bool printable = !c.sv_id.empty() && c.sv_id.size() <= 64;
        for (const char ch : c.sv_id) printable = printable && ch >= 0x20 && ch < 0x7f && ch != '#';
        check(printable, "sv_id", "sv_id must be 1 to 64 printable characters other than '#'");
        check(c.vlan_priority <= 7, "vlan_priority", "vlan_priority must lie in [0, 7]");
        check(c.vlan_id <= 0x0FFF, "vlan_id", "vlan_id must lie in [0, 4095]");
        check(c.nominal_hz > 0, "nominal_hz", "nominal_hz must be positive");
        check(budget::supported_points_per_period(c.points_per_period), "points_per_period",
              "points_per_period must be 80 or 256, got " + std::to_string(c.points_per_period));
        try {
            c.schema.validate();
        } catch (const SvError& e) {
            fail_at(schema_line_, strip_code(e));
        }
        check(!c.schema.members.empty(), "member", "schema has no members");
        for (const auto& v : budget::validate_constraints(1, c.schema)) fail_at(schema_line_, v.to_string());
        try {
            c.endpoint.validate();
        } catch (const SvError& e) {
            std::size_t line = line_of("endpoint.address");
            if (line == 0) line = line_of("endpoint.mode");
            fail_at(line, strip_code(e));
        }
        if (!c.channels.empty() && c.channels.size() != c.schema.members.size()) {
            fail_at(channel_lines_.back(), std::to_string(c.channels.size()) + " channels for " +
                                               std::to_string(c.schema.members.size()) + " members");
        }
        for (std::size_t i = 0; i < c.channels.size(); ++i) {
            try {
                c.channels[i].validate();
            } catch (const SvError& e) {
                fail_at(channel_lines_[i], strip_code(e));
            }
        }
    }

    std::string_view text_;
    std::string_view origin_;
    RunConfig cfg_;
    std::size_t line_ = 0;
    std::size_t schema_line_ = 0;
    std::vector<std::size_t> channel_lines_;
    std::map<std::string, std::size_t> seen_;
};

} // namespace

std::vector<sim::ChannelSpec> RunConfig::effective_channels() const {
    if (!channels.empty()) return channels;
    return std::vector<sim::ChannelSpec>(schema.members.size());
}

SvFrame RunConfig::frame_template() const {
    SvFrame f;
    f.dst_mac = dst_mac;
    f.src_mac = src_mac;
    f.vlan = VlanTag{vlan_priority, false, vlan_id};
    f.appid = appid;
    Asdu a;
    a.sv_id = sv_id;
    a.conf_rev = conf_rev;
    a.smp_synch = smp_synch;
    a.seq_data.assign(schema.packed_width(), 0);
    f.apdu.asdus.push_back(std::move(a));
    return f;
}

RunConfig parse(std::string_view text, std::string_view origin) { return Parser(text, origin).run(); }

RunConfig load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SvError(ErrorCode::ConfigError, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path.string());
}

std::string dump(const RunConfig& c) {
    std::ostringstream os;
    os << "sv_id = " << c.sv_id << '\n'
       << "appid = " << hex_value(c.appid, 4) << '\n'
       << "conf_rev = " << c.conf_rev << '\n'
       << "dst_mac = " << to_string(c.dst_mac) << '\n'
       << "src_mac = " << to_string(c.src_mac) << '\n'
       << "vlan_priority = " << unsigned(c.vlan_priority) << '\n'
       << "vlan_id = " << c.vlan_id << '\n'
       << "smp_synch = " << synch_name(c.smp_synch) << '\n'
       << "nominal_hz = " << c.nominal_hz << '\n'
       << "points_per_period = " << c.points_per_period << '\n'
       << "seed = " << c.seed << '\n';
    for (const auto& m : c.schema.members) {
        os << "member = " << m.name << ':' << m.width << ':' << (m.is_signed ? "signed" : "unsigned") << ':'
           << int(m.scale_factor) << ':' << m.offset << ':' << (m.include_quality ? "quality" : "none") << '\n';
    }
    os << "endpoint.mode = " << transport::to_string(c.endpoint.mode) << '\n'
       << "endpoint.address = " << c.endpoint.address << '\n'
       << "endpoint.port = " << c.endpoint.port << '\n'
       << "endpoint.ttl = " << unsigned(c.endpoint.multicast_ttl) << '\n';
    if (c.endpoint.bind_interface) os << "endpoint.interface = " << *c.endpoint.bind_interface << '\n';
    for (const auto& ch : c.channels) {
        os << "channel = " << ch.logic_node << ' ' << sim::to_string(ch.kind) << " amplitude=" << fmt_double(ch.amplitude)
           << " frequency=" << fmt_double(ch.frequency_hz) << " phase=" << fmt_double(ch.phase_rad)
           << " dc=" << fmt_double(ch.dc_offset) << " sigma=" << fmt_double(ch.noise_sigma)
           << " invalid_every=" << ch.quality_profile.invalid_every << '\n';
    }
    return os.str();
}

} // namespace redsv::config
