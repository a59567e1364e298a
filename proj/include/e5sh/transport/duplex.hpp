#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "e5sh/netem/link.hpp"

namespace e5sh::transport {

// Message-oriented duplex channel the protocol endpoints talk over. One
// datagram carries exactly one wire unit (a connection header or a framed
// message); the emulated-link binding below keeps ordering per direction,
// and live TCP keeps ordering by nature.
class Duplex {
public:
    using Receiver = std::function<void(std::vector<uint8_t> message, int64_t now_ns)>;

    virtual ~Duplex() = default;

    // Returns an id usable with cancel(), or nullopt when the channel
    // dropped the message on ingress (emulated loss).
    virtual std::optional<uint64_t> send(std::vector<uint8_t> message) = 0;
    virtual bool cancel(uint64_t message_id) = 0;
    virtual void set_receiver(Receiver receiver) = 0;
    virtual uint64_t in_flight() const = 0;  // sent, not yet delivered or dropped
    virtual int64_t now_ns() const = 0;
};

// One end of an emulated link pair. Each connection owns its LinkPair, the
// way a TCP connection owns its socket.
class SimDuplex : public Duplex {
public:
    SimDuplex(netem::Link* tx, netem::Link* rx) : tx_(tx), rx_(rx) {}

    std::optional<uint64_t> send(std::vector<uint8_t> message) override { return tx_->send(std::move(message)); }
    bool cancel(uint64_t id) override { return tx_->cancel(id); }
    void set_receiver(Receiver receiver) override { rx_->set_sink(std::move(receiver)); }
    uint64_t in_flight() const override { return tx_->counters().in_queue(); }
    int64_t now_ns() const override { return tx_->scheduler()->now_ns(); }

private:
    netem::Link* tx_;
    netem::Link* rx_;
};

struct SimDuplexPair {
    SimDuplex near;  // robot side: sends on up, hears down
    SimDuplex far;   // edge side: sends on down, hears up

    explicit SimDuplexPair(netem::LinkPair& links)
        : near(&links.up, &links.down), far(&links.down, &links.up) {}
};

}  // namespace e5sh::transport
