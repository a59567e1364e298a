#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "e5sh/bytes.hpp"

namespace e5sh::mqtt {

// MQTT 3.1.1 subset: QoS0/QoS1, clean session, no retain, no will, no QoS2.

enum class PacketType : uint8_t {
    Connect = 1,
    Connack = 2,
    Publish = 3,
    Puback = 4,
    Subscribe = 8,
    Suback = 9,
    Pingreq = 12,
    Pingresp = 13,
    Disconnect = 14,
};

constexpr uint32_t kMaxRemainingLength = 268435455;  // 0xFFFFFF7F varint ceiling

struct MqttPacket {
    PacketType type = PacketType::Publish;
    bool dup = false;
    uint8_t qos = 0;  // retain is always 0 in this subset

    uint16_t packet_id = 0;  // PUBLISH(qos1)/PUBACK/SUBSCRIBE/SUBACK; 0 = absent
    std::string topic;       // PUBLISH
    std::vector<uint8_t> payload;

    std::string client_id;      // CONNECT
    uint16_t keepalive_s = 60;  // CONNECT
    std::vector<std::pair<std::string, uint8_t>> subscriptions;  // SUBSCRIBE: filter, requested qos
    std::vector<uint8_t> return_codes;  // SUBACK: one per filter, 0x80 = failure
    uint8_t connack_code = 0;           // CONNACK
    bool session_present = false;       // CONNACK

    bool operator==(const MqttPacket&) const = default;
};

std::vector<uint8_t> encode_remaining_length(uint32_t n);
uint32_t decode_remaining_length(ByteReader& r);

std::vector<uint8_t> encode_packet(const MqttPacket& p);
MqttPacket decode_packet(const std::vector<uint8_t>& bytes);

// Incremental packet parser for byte-stream transports.
class PacketDeframer {
public:
    void feed(const uint8_t* data, size_t n);
    void feed(const std::vector<uint8_t>& chunk) { feed(chunk.data(), chunk.size()); }
    std::optional<MqttPacket> pop();

private:
    std::vector<uint8_t> buf_;
};

// Topic-filter support: exact segments plus a trailing '#' multi-level
// wildcard. "robot/#" matches "robot", "robot/1/rgb", "robot/2/depth".
bool valid_topic(const std::string& topic);
bool valid_filter(const std::string& filter);
bool topic_matches(const std::string& filter, const std::string& topic);

}  // namespace e5sh::mqtt
