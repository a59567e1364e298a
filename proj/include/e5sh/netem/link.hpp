#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "e5sh/netem/profile.hpp"
#include "e5sh/sim/scheduler.hpp"

namespace e5sh::netem {

struct LinkCounters {
    uint64_t sent = 0;
    uint64_t delivered = 0;
    uint64_t dropped = 0;          // loss injection + cancelled sends
    uint64_t bytes_sent = 0;
    uint64_t bytes_delivered = 0;

    uint64_t in_queue() const { return sent - delivered - dropped; }
};

// One direction of an emulated link, driven by the shared event scheduler.
// Delivery time = max(now + sampled one-way delay, previous delivery time)
// plus bytes/bandwidth transmission time; the max() enforces FIFO.
class Link {
public:
    using Sink = std::function<void(std::vector<uint8_t> message, int64_t now_ns)>;

    Link(NetworkProfile profile, sim::EventScheduler* sched, uint64_t seed);

    void set_sink(Sink sink) { sink_ = std::move(sink); }

    // Returns a message id usable with cancel(), or nullopt if the message
    // was dropped by loss injection.
    std::optional<uint64_t> send(std::vector<uint8_t> message);

    // Drops a message that is still in flight (publisher queue overflow).
    // Returns false if it was already delivered or unknown.
    bool cancel(uint64_t message_id);

    const LinkCounters& counters() const { return counters_; }
    const NetworkProfile& profile() const { return profile_; }
    sim::EventScheduler* scheduler() const { return sched_; }

private:
    NetworkProfile profile_;
    sim::EventScheduler* sched_;
    std::mt19937_64 rng_;
    Sink sink_;
    LinkCounters counters_;
    int64_t prev_delivery_ns_ = 0;
    uint64_t next_id_ = 1;
    std::shared_ptr<std::vector<uint64_t>> cancelled_ = std::make_shared<std::vector<uint64_t>>();
    std::shared_ptr<std::vector<uint64_t>> pending_ = std::make_shared<std::vector<uint64_t>>();
};

struct LinkPair {
    Link up;    // near -> far
    Link down;  // far -> near

    LinkPair(const NetworkProfile& profile, sim::EventScheduler* sched, uint64_t seed);
};

// n sequential echo exchanges over the pair; RTT_i = uplink + downlink delay.
// A probe lost in either direction yields nullopt (a Timeout sample).
std::vector<std::optional<double>> rtt_probe(LinkPair& pair, int n, double timeout_ms = 1000.0);

// Strips Timeout samples for distribution statistics.
std::vector<double> valid_samples(const std::vector<std::optional<double>>& samples);

}  // namespace e5sh::netem
