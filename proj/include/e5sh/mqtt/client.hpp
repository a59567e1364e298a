#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "e5sh/mqtt/packet.hpp"
#include "e5sh/transport/duplex.hpp"

namespace e5sh::mqtt {

struct ClientConfig {
    std::string client_id;
    uint16_t keepalive_s = 60;
    int64_t retry_timeout_ns = 200'000'000;  // QoS1 publish redelivery deadline
    int retry_cap = 10;
};

struct ClientCounters {
    uint64_t publishes = 0;
    uint64_t messages_received = 0;  // dispatched subscriber callbacks
    uint64_t duplicates_received = 0;
    uint64_t retransmissions = 0;
    uint64_t dropped_retry_exhausted = 0;
    uint64_t acks_received = 0;
};

class MqttClient {
public:
    // topic, payload, dup flag, receive time
    using MessageFn = std::function<void(const std::string&, std::vector<uint8_t>, bool, int64_t)>;

    MqttClient(transport::Duplex* duplex, ClientConfig cfg);

    void connect();
    bool connected() const { return connected_; }

    // Registers the callback immediately and sends SUBSCRIBE. Granted qos
    // arrives with SUBACK and is observable via subscribed().
    void subscribe(const std::string& filter, uint8_t qos, MessageFn on_message);
    bool subscribed(const std::string& filter) const;

    // QoS0: fire and forget. QoS1: tracked until PUBACK; tick() redelivers.
    void publish(const std::string& topic, std::vector<uint8_t> payload, uint8_t qos);

    void tick(int64_t now_ns);  // client-side QoS1 redelivery sweep
    void ping();
    void disconnect();

    size_t in_flight() const { return in_flight_.size(); }
    bool ping_outstanding() const { return ping_outstanding_; }
    const ClientCounters& counters() const { return counters_; }

private:
    struct InFlight {
        MqttPacket packet;
        int64_t deadline_ns = 0;
        int retries = 0;
    };
    struct Subscription {
        uint8_t requested_qos = 0;
        bool acked = false;
        MessageFn on_message;
    };

    void handle_packet(MqttPacket p, int64_t now_ns);
    uint16_t allocate_packet_id();

    transport::Duplex* duplex_;
    ClientConfig cfg_;
    bool connected_ = false;
    bool ping_outstanding_ = false;
    std::map<std::string, Subscription> subscriptions_;
    std::map<uint16_t, InFlight> in_flight_;
    std::map<uint16_t, std::string> pending_subacks_;  // packet_id -> filter
    uint16_t next_packet_id_ = 1;
    ClientCounters counters_;
};

}  // namespace e5sh::mqtt
