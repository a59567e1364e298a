#include "e5sh/mqtt/client.hpp"

namespace e5sh::mqtt {

MqttClient::MqttClient(transport::Duplex* duplex, ClientConfig cfg)
    : duplex_(duplex), cfg_(std::move(cfg)) {
    duplex_->set_receiver([this](std::vector<uint8_t> bytes, int64_t now_ns) {
        try {
            handle_packet(decode_packet(bytes), now_ns);
        } catch (const WireError&) {
            // Malformed inbound packet: ignore; the broker side counts its own.
        }
    });
}

void MqttClient::connect() {
    MqttPacket p;
    p.type = PacketType::Connect;
    p.client_id = cfg_.client_id;
    p.keepalive_s = cfg_.keepalive_s;
    duplex_->send(encode_packet(p));
}

uint16_t MqttClient::allocate_packet_id() {
    for (int attempts = 0; attempts < 65535; ++attempts) {
        uint16_t id = next_packet_id_;
        next_packet_id_ = static_cast<uint16_t>(next_packet_id_ == 0xFFFF ? 1 : next_packet_id_ + 1);
        if (!in_flight_.count(id) && !pending_subacks_.count(id)) return id;
    }
    throw std::runtime_error("mqtt client has 65535 unacknowledged packets");
}

void MqttClient::subscribe(const std::string& filter, uint8_t qos, MessageFn on_message) {
    if (!valid_filter(filter)) throw WireError(WireError::Kind::Format, "invalid topic filter: " + filter);
    subscriptions_[filter] = Subscription{qos, false, std::move(on_message)};

    MqttPacket p;
    p.type = PacketType::Subscribe;
    p.packet_id = allocate_packet_id();
    p.subscriptions.emplace_back(filter, qos);
    pending_subacks_[p.packet_id] = filter;
    duplex_->send(encode_packet(p));
}

bool MqttClient::subscribed(const std::string& filter) const {
    auto it = subscriptions_.find(filter);
    return it != subscriptions_.end() && it->second.acked;
}

void MqttClient::publish(const std::string& topic, std::vector<uint8_t> payload, uint8_t qos) {
    if (qos > 1) throw WireError(WireError::Kind::Unsupported, "qos must be 0 or 1");
    MqttPacket p;
    p.type = PacketType::Publish;
    p.topic = topic;
    p.payload = std::move(payload);
    p.qos = qos;
    ++counters_.publishes;
    if (qos == 0) {
        duplex_->send(encode_packet(p));
        return;
    }
    p.packet_id = allocate_packet_id();
    in_flight_[p.packet_id] = InFlight{p, duplex_->now_ns() + cfg_.retry_timeout_ns, 0};
    duplex_->send(encode_packet(p));
}

void MqttClient::tick(int64_t now_ns) {
    for (auto it = in_flight_.begin(); it != in_flight_.end();) {
        InFlight& f = it->second;
        if (f.deadline_ns > now_ns) {
            ++it;
            continue;
        }
        if (f.retries >= cfg_.retry_cap) {
            ++counters_.dropped_retry_exhausted;
            it = in_flight_.erase(it);
            continue;
        }
        f.packet.dup = true;
        ++f.retries;
        f.deadline_ns = now_ns + cfg_.retry_timeout_ns;
        ++counters_.retransmissions;
        duplex_->send(encode_packet(f.packet));
        ++it;
    }
}

void MqttClient::ping() {
    MqttPacket p;
    p.type = PacketType::Pingreq;
    ping_outstanding_ = true;
    duplex_->send(encode_packet(p));
}

void MqttClient::disconnect() {
    MqttPacket p;
    p.type = PacketType::Disconnect;
    duplex_->send(encode_packet(p));
    connected_ = false;
}

void MqttClient::handle_packet(MqttPacket p, int64_t now_ns) {
    switch (p.type) {
        case PacketType::Connack:
            connected_ = (p.connack_code == 0);
            break;
        case PacketType::Suback: {
            auto it = pending_subacks_.find(p.packet_id);
            if (it == pending_subacks_.end()) break;
            bool granted = !p.return_codes.empty() && p.return_codes[0] != 0x80;
            auto sub = subscriptions_.find(it->second);
            if (sub != subscriptions_.end()) {
                if (granted)
                    sub->second.acked = true;
                else
                    subscriptions_.erase(sub);
            }
            pending_subacks_.erase(it);
            break;
        }
        case PacketType::Puback:
            ++counters_.acks_received;
            in_flight_.erase(p.packet_id);
            break;
        case PacketType::Publish: {
            if (p.qos == 1) {
                MqttPacket ack;
                ack.type = PacketType::Puback;
                ack.packet_id = p.packet_id;
                duplex_->send(encode_packet(ack));
            }
            if (p.dup) ++counters_.duplicates_received;
            for (auto& [filter, sub] : subscriptions_) {
                if (!topic_matches(filter, p.topic)) continue;
                ++counters_.messages_received;
                if (sub.on_message) sub.on_message(p.topic, p.payload, p.dup, now_ns);
            }
            break;
        }
        case PacketType::Pingresp:
            ping_outstanding_ = false;
            break;
        default:
            break;  // broker-bound packet types are not expected here
    }
}

}  // namespace e5sh::mqtt
