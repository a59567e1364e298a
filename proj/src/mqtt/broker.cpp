#include "e5sh/mqtt/broker.hpp"

namespace e5sh::mqtt {

BrokerCore::SessionId BrokerCore::attach_session(SendFn send) {
    SessionId sid = next_sid_++;
    sessions_[sid].send = std::move(send);
    return sid;
}

void BrokerCore::detach_session(SessionId sid) { sessions_.erase(sid); }

bool BrokerCore::session_connected(SessionId sid) const {
    auto it = sessions_.find(sid);
    return it != sessions_.end() && it->second.connected;
}

size_t BrokerCore::in_flight_total() const {
    size_t n = 0;
    for (const auto& [sid, s] : sessions_) n += s.in_flight.size();
    return n;
}

uint16_t BrokerCore::allocate_packet_id(Session& s) {
    // 1..65535, skipping ids still in flight.
    for (int attempts = 0; attempts < 65535; ++attempts) {
        uint16_t id = s.next_packet_id;
        s.next_packet_id = static_cast<uint16_t>(s.next_packet_id == 0xFFFF ? 1 : s.next_packet_id + 1);
        if (!s.in_flight.count(id)) return id;
    }
    throw std::runtime_error("broker session has 65535 unacknowledged messages");
}

void BrokerCore::on_packet(SessionId sid, const MqttPacket& packet, int64_t now_ns) {
    auto it = sessions_.find(sid);
    if (it == sessions_.end()) {
        ++counters_.protocol_errors;
        return;
    }
    Session& s = it->second;

    switch (packet.type) {
        case PacketType::Connect: {
            s.connected = true;
            s.client_id = packet.client_id;
            MqttPacket ack;
            ack.type = PacketType::Connack;
            ack.session_present = false;  // clean session only
            ack.connack_code = 0;
            s.send(ack);
            break;
        }
        case PacketType::Publish: {
            ++counters_.publishes_received;
            if (!s.connected) {
                ++counters_.dropped_not_connected;
                return;
            }
            if (packet.qos == 1) {
                MqttPacket ack;
                ack.type = PacketType::Puback;
                ack.packet_id = packet.packet_id;
                s.send(ack);
            }
            route_publish(packet, now_ns);
            break;
        }
        case PacketType::Puback: {
            s.in_flight.erase(packet.packet_id);
            break;
        }
        case PacketType::Subscribe: {
            MqttPacket ack;
            ack.type = PacketType::Suback;
            ack.packet_id = packet.packet_id;
            if (!s.connected) {
                ++counters_.dropped_not_connected;
                for (size_t i = 0; i < packet.subscriptions.size(); ++i) ack.return_codes.push_back(0x80);
                s.send(ack);
                return;
            }
            for (const auto& [filter, qos] : packet.subscriptions) {
                if (valid_filter(filter)) {
                    s.subscriptions[filter] = qos;
                    ack.return_codes.push_back(qos);
                } else {
                    ++counters_.protocol_errors;
                    ack.return_codes.push_back(0x80);
                }
            }
            s.send(ack);
            break;
        }
        case PacketType::Pingreq: {
            MqttPacket pong;
            pong.type = PacketType::Pingresp;
            s.send(pong);
            break;
        }
        case PacketType::Disconnect: {
            // Clean session: subscriptions and undelivered state evaporate.
            s.connected = false;
            s.subscriptions.clear();
            s.in_flight.clear();
            break;
        }
        default:
            ++counters_.protocol_errors;
            break;
    }
}

void BrokerCore::route_publish(const MqttPacket& publish, int64_t now_ns) {
    size_t matched = 0;
    for (auto& [sid, s] : sessions_) {
        if (!s.connected) continue;
        uint8_t best_qos = 0;
        bool found = false;
        for (const auto& [filter, sub_qos] : s.subscriptions) {
            if (topic_matches(filter, publish.topic)) {
                found = true;
                best_qos = std::max(best_qos, sub_qos);
            }
        }
        if (!found) continue;
        ++matched;

        MqttPacket out;
        out.type = PacketType::Publish;
        out.topic = publish.topic;
        out.payload = publish.payload;
        out.qos = std::min(publish.qos, best_qos);
        if (out.qos == 1) {
            out.packet_id = allocate_packet_id(s);
            s.in_flight[out.packet_id] = InFlight{out, now_ns + cfg_.retry_timeout_ns, 0};
        }
        ++counters_.deliveries_sent;
        s.send(out);
    }
    if (matched == 0) ++counters_.dropped_no_subscriber;
}

void BrokerCore::tick(int64_t now_ns) {
    for (auto& [sid, s] : sessions_) {
        for (auto it = s.in_flight.begin(); it != s.in_flight.end();) {
            InFlight& f = it->second;
            if (f.deadline_ns > now_ns) {
                ++it;
                continue;
            }
            if (f.retries >= cfg_.retry_cap) {
                ++counters_.dropped_retry_exhausted;
                it = s.in_flight.erase(it);
                continue;
            }
            f.packet.dup = true;
            ++f.retries;
            f.deadline_ns = now_ns + cfg_.retry_timeout_ns;
            ++counters_.retransmissions;
            ++counters_.deliveries_sent;
            s.send(f.packet);
            ++it;
        }
    }
}

BrokerCore::SessionId SimBroker::bind(transport::Duplex* session_end) {
    auto sid = core_.attach_session([session_end](const MqttPacket& p) { session_end->send(encode_packet(p)); });
    session_end->set_receiver([this, sid](std::vector<uint8_t> bytes, int64_t now_ns) {
        try {
            core_.on_packet(sid, decode_packet(bytes), now_ns);
        } catch (const WireError&) {
            core_.note_protocol_error();  // malformed bytes from the wire: count, carry on
        }
    });
    return sid;
}

void SimBroker::start_ticking(int64_t period_ns) {
    if (ticking_) return;
    ticking_ = true;
    schedule_sweep(period_ns);
}

void SimBroker::schedule_sweep(int64_t period_ns) {
    sched_->schedule_after(period_ns, [this, period_ns] {
        if (!ticking_) return;
        core_.tick(sched_->now_ns());
        schedule_sweep(period_ns);
    });
}

}  // namespace e5sh::mqtt
