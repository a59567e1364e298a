#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "e5sh/mqtt/packet.hpp"
#include "e5sh/sim/scheduler.hpp"
#include "e5sh/transport/duplex.hpp"

namespace e5sh::mqtt {

struct BrokerConfig {
    int64_t retry_timeout_ns = 200'000'000;  // QoS1 redelivery deadline
    int retry_cap = 10;                      // redeliveries before giving up
};

struct BrokerCounters {
    uint64_t publishes_received = 0;
    uint64_t deliveries_sent = 0;       // PUBLISH packets pushed to subscribers (incl. retransmits)
    uint64_t retransmissions = 0;
    uint64_t dropped_no_subscriber = 0;
    uint64_t dropped_not_connected = 0;
    uint64_t dropped_retry_exhausted = 0;
    uint64_t protocol_errors = 0;
};

// Transport-agnostic broker logic: sessions are attached with a send
// callback, inbound packets are fed through on_packet, and QoS1 redelivery
// is driven by tick(now).
class BrokerCore {
public:
    using SessionId = uint64_t;
    using SendFn = std::function<void(const MqttPacket&)>;

    explicit BrokerCore(BrokerConfig cfg = {}) : cfg_(cfg) {}

    SessionId attach_session(SendFn send);
    void detach_session(SessionId sid);

    void on_packet(SessionId sid, const MqttPacket& packet, int64_t now_ns);
    void tick(int64_t now_ns);  // qos1 retransmission sweep

    const BrokerCounters& counters() const { return counters_; }
    void note_protocol_error() { ++counters_.protocol_errors; }
    size_t in_flight_total() const;
    size_t session_count() const { return sessions_.size(); }
    bool session_connected(SessionId sid) const;

    const BrokerConfig& config() const { return cfg_; }

private:
    struct InFlight {
        MqttPacket packet;  // qos1 PUBLISH as last sent (dup set on retransmits)
        int64_t deadline_ns = 0;
        int retries = 0;
    };
    struct Session {
        SendFn send;
        bool connected = false;
        std::string client_id;
        std::map<std::string, uint8_t> subscriptions;  // filter -> granted qos
        std::map<uint16_t, InFlight> in_flight;
        uint16_t next_packet_id = 1;
    };

    void route_publish(const MqttPacket& publish, int64_t now_ns);
    uint16_t allocate_packet_id(Session& s);

    BrokerConfig cfg_;
    BrokerCounters counters_;
    std::map<SessionId, Session> sessions_;
    SessionId next_sid_ = 1;
};

// Event-scheduler binding: one Duplex per client session, periodic QoS1
// redelivery sweeps while running.
class SimBroker {
public:
    SimBroker(sim::EventScheduler* sched, BrokerConfig cfg = {}) : sched_(sched), core_(cfg) {}

    BrokerCore::SessionId bind(transport::Duplex* session_end);
    void start_ticking(int64_t period_ns = 50'000'000);
    void stop_ticking() { ticking_ = false; }

    BrokerCore& core() { return core_; }

private:
    void schedule_sweep(int64_t period_ns);

    sim::EventScheduler* sched_;
    BrokerCore core_;
    bool ticking_ = false;
};

}  // namespace e5sh::mqtt
