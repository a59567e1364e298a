#include "e5sh/netem/link.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace e5sh::netem {

Link::Link(NetworkProfile profile, sim::EventScheduler* sched, uint64_t seed)
    : profile_(std::move(profile)), sched_(sched), rng_(seed) {
    profile_.validate();
}

std::optional<uint64_t> Link::send(std::vector<uint8_t> message) {
    counters_.sent++;
    counters_.bytes_sent += message.size();

    if (profile_.loss_prob > 0.0) {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        if (u(rng_) < profile_.loss_prob) {
            counters_.dropped++;
            return std::nullopt;
        }
    }

    double delay_ms = profile_.delay.sample_ms(rng_);
    int64_t arrival = sched_->now_ns() + static_cast<int64_t>(std::llround(delay_ms * 1e6));
    int64_t start = std::max(arrival, prev_delivery_ns_);
    int64_t tx_ns = 0;
    if (profile_.bandwidth_kbps)
        tx_ns = static_cast<int64_t>(std::llround(static_cast<double>(message.size()) * 1e6 / *profile_.bandwidth_kbps));
    int64_t delivery = start + tx_ns;
    prev_delivery_ns_ = delivery;

    uint64_t id = next_id_++;
    pending_->push_back(id);
    auto cancelled = cancelled_;
    auto pending = pending_;
    sched_->schedule_at(delivery, [this, id, cancelled, pending, msg = std::move(message)]() mutable {
        pending->erase(std::remove(pending->begin(), pending->end(), id), pending->end());
        auto it = std::find(cancelled->begin(), cancelled->end(), id);
        if (it != cancelled->end()) {
            cancelled->erase(it);
            return;  // counted as dropped at cancel time
        }
        counters_.delivered++;
        counters_.bytes_delivered += msg.size();
        if (sink_) sink_(std::move(msg), sched_->now_ns());
    });
    return id;
}

bool Link::cancel(uint64_t message_id) {
    auto it = std::find(pending_->begin(), pending_->end(), message_id);
    if (it == pending_->end()) return false;
    if (std::find(cancelled_->begin(), cancelled_->end(), message_id) != cancelled_->end()) return false;
    cancelled_->push_back(message_id);
    counters_.dropped++;
    return true;
}

LinkPair::LinkPair(const NetworkProfile& profile, sim::EventScheduler* sched, uint64_t seed)
    : up(profile, sched, seed * 2 + 1), down(profile, sched, seed * 2 + 2) {}

std::vector<std::optional<double>> rtt_probe(LinkPair& pair, int n, double timeout_ms) {
    if (n < 1) throw std::invalid_argument("rtt_probe: n must be >= 1");
    if (timeout_ms <= 0.0) throw std::invalid_argument("rtt_probe: timeout must be positive");
    sim::EventScheduler* sched = pair.up.scheduler();

    std::vector<std::optional<double>> samples;
    samples.reserve(static_cast<size_t>(n));

    // Echo at the far end: any arriving probe is immediately reflected.
    pair.up.set_sink([&pair](std::vector<uint8_t> msg, int64_t) { pair.down.send(std::move(msg)); });

    // Each probe carries a sequence number so a reply that straggles in after
    // its deadline cannot be credited to a later probe.
    struct Probe {
        uint64_t seq = 0;
        int64_t reply_ns = -1;
    } current;

    pair.down.set_sink([&current](std::vector<uint8_t> msg, int64_t now_ns) {
        if (msg.size() != 8) return;
        uint64_t seq = 0;
        for (int i = 0; i < 8; ++i) seq |= static_cast<uint64_t>(msg[static_cast<size_t>(i)]) << (8 * i);
        if (seq == current.seq && current.reply_ns < 0) current.reply_ns = now_ns;
    });

    const int64_t timeout_ns = static_cast<int64_t>(std::llround(timeout_ms * 1e6));
    for (int i = 0; i < n; ++i) {
        current.seq = static_cast<uint64_t>(i);
        current.reply_ns = -1;

        std::vector<uint8_t> probe(8);
        for (int b = 0; b < 8; ++b) probe[static_cast<size_t>(b)] = static_cast<uint8_t>(current.seq >> (8 * b));

        const int64_t sent_ns = sched->now_ns();
        const int64_t deadline = sent_ns + timeout_ns;
        pair.up.send(std::move(probe));

        while (current.reply_ns < 0) {
            auto due = sched->next_due();
            if (!due || *due > deadline) break;
            sched->advance(*due);
        }
        if (current.reply_ns >= 0) {
            samples.emplace_back(static_cast<double>(current.reply_ns - sent_ns) / 1e6);
        } else {
            sched->advance(deadline);
            samples.emplace_back(std::nullopt);
        }
    }

    pair.up.set_sink(nullptr);
    pair.down.set_sink(nullptr);
    return samples;
}

std::vector<double> valid_samples(const std::vector<std::optional<double>>& samples) {
    std::vector<double> out;
    out.reserve(samples.size());
    for (const auto& s : samples)
        if (s) out.push_back(*s);
    return out;
}

}  // namespace e5sh::netem
