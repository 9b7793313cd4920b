#include "redsv/netsim.hpp"

#include "redsv/error.hpp"

#include <algorithm>
#include <cmath>

namespace redsv::netsim {

void ChannelSpec::validate() const {
    auto prob = [](double p, const char* name) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw SvError(ErrorCode::InvalidArgument, std::string(name) + " must lie in [0, 1]");
        }
    };
    prob(loss_probability, "loss probability");
    prob(reorder_probability, "reorder probability");
    if (jitter.count() < 0) throw SvError(ErrorCode::InvalidArgument, "jitter must be non-negative");
    if (base_latency.count() < 0) throw SvError(ErrorCode::InvalidArgument, "latency must be non-negative");
}

Channel::Channel(const ChannelSpec& spec) : spec_(spec), rng_(spec.seed) { spec_.validate(); }

std::vector<Delivery> Channel::transmit(ByteView datagram, Duration send_time) {
    ++transmitted_;
    // Fixed draw count per datagram keeps runs comparable across settings.
    const double u_loss = rng_.uniform();
    const double u_jitter = rng_.uniform();
    const double u_reorder = rng_.uniform();

    if (u_loss < spec_.loss_probability) {
        ++dropped_;
        return {};
    }

    const double offset = static_cast<double>(spec_.jitter.count()) * (2.0 * u_jitter - 1.0);
    Duration when = send_time + spec_.base_latency + Duration(std::llround(offset));
    when = std::max(when, send_time);

    const Key key{when, sequence_++};
    queue_.emplace(key, Bytes(datagram.begin(), datagram.end()));

    if (held_) {
        auto node = queue_.extract(*held_);
        if (!node.empty()) {
            node.key().first = std::max(node.key().first, when + Duration(1));
            queue_.insert(std::move(node));
        }
        held_.reset();
    }
    if (u_reorder < spec_.reorder_probability) {
        held_ = key;
        ++reordered_;
    }
    return {Delivery{when, Bytes(datagram.begin(), datagram.end())}};
}

std::vector<Delivery> Channel::drain(Duration until) {
    std::vector<Delivery> out;
    auto it = queue_.begin();
    while (it != queue_.end() && it->first.first <= until) {
        if (held_ && *held_ == it->first) {
            // Waits for the next transmit to overtake it.
            ++it;
            continue;
        }
        out.push_back(Delivery{it->first.first, std::move(it->second)});
        it = queue_.erase(it);
    }
    return out;
}

std::vector<Delivery> Channel::drain_all() {
    held_.reset();
    return drain(Duration::max());
}

} // namespace redsv::netsim
