#include "e5sh/mqtt/packet.hpp"

namespace e5sh::mqtt {
namespace {

void write_string(ByteWriter& w, const std::string& s) {
    if (s.size() > 0xFFFF) throw WireError(WireError::Kind::TooLarge, "mqtt string exceeds 65535 bytes");
    w.u16be(static_cast<uint16_t>(s.size()));
    w.ascii(s);
}

std::string read_string(ByteReader& r) {
    uint16_t len = r.u16be();
    return r.ascii(len);
}

constexpr uint8_t kConnectCleanSession = 0x02;

}  // namespace

std::vector<uint8_t> encode_remaining_length(uint32_t n) {
    if (n > kMaxRemainingLength)
        throw WireError(WireError::Kind::TooLarge, "remaining length exceeds 268435455");
    std::vector<uint8_t> out;
    do {
        uint8_t digit = n % 128;
        n /= 128;
        if (n > 0) digit |= 0x80;
        out.push_back(digit);
    } while (n > 0);
    return out;
}

uint32_t decode_remaining_length(ByteReader& r) {
    uint32_t value = 0;
    uint32_t multiplier = 1;
    for (int i = 0; i < 4; ++i) {
        uint8_t digit = r.u8();
        value += static_cast<uint32_t>(digit & 0x7F) * multiplier;
        if (!(digit & 0x80)) return value;
        multiplier *= 128;
    }
    throw WireError(WireError::Kind::Format, "malformed remaining-length varint (over 4 bytes)");
}

std::vector<uint8_t> encode_packet(const MqttPacket& p) {
    ByteWriter body;
    uint8_t flags = 0;

    switch (p.type) {
        case PacketType::Connect:
            write_string(body, "MQTT");
            body.u8(0x04);  // protocol level 3.1.1
            body.u8(kConnectCleanSession);
            body.u16be(p.keepalive_s);
            write_string(body, p.client_id);
            break;
        case PacketType::Connack:
            body.u8(p.session_present ? 0x01 : 0x00);
            body.u8(p.connack_code);
            break;
        case PacketType::Publish:
            if (p.qos > 1) throw WireError(WireError::Kind::Unsupported, "qos must be 0 or 1");
            if (p.qos == 1 && p.packet_id == 0)
                throw WireError(WireError::Kind::Format, "qos1 publish requires a nonzero packet id");
            if (!valid_topic(p.topic)) throw WireError(WireError::Kind::Format, "invalid publish topic");
            flags = static_cast<uint8_t>((p.dup ? 0x08 : 0x00) | (p.qos << 1));
            write_string(body, p.topic);
            if (p.qos == 1) body.u16be(p.packet_id);
            body.bytes(p.payload);
            break;
        case PacketType::Puback:
            if (p.packet_id == 0) throw WireError(WireError::Kind::Format, "puback requires a packet id");
            body.u16be(p.packet_id);
            break;
        case PacketType::Subscribe:
            if (p.packet_id == 0) throw WireError(WireError::Kind::Format, "subscribe requires a packet id");
            if (p.subscriptions.empty())
                throw WireError(WireError::Kind::Format, "subscribe requires at least one filter");
            flags = 0x02;  // mandated reserved flags for SUBSCRIBE
            body.u16be(p.packet_id);
            for (const auto& [filter, qos] : p.subscriptions) {
                if (qos > 1) throw WireError(WireError::Kind::Unsupported, "subscription qos must be 0 or 1");
                write_string(body, filter);
                body.u8(qos);
            }
            break;
        case PacketType::Suback:
            if (p.packet_id == 0) throw WireError(WireError::Kind::Format, "suback requires a packet id");
            body.u16be(p.packet_id);
            for (uint8_t code : p.return_codes) body.u8(code);
            break;
        case PacketType::Pingreq:
        case PacketType::Pingresp:
        case PacketType::Disconnect:
            break;
    }

    auto body_bytes = body.take();
    ByteWriter out;
    out.u8(static_cast<uint8_t>((static_cast<uint8_t>(p.type) << 4) | flags));
    out.bytes(encode_remaining_length(static_cast<uint32_t>(body_bytes.size())));
    out.bytes(body_bytes);
    return out.take();
}

namespace {

MqttPacket decode_body(uint8_t first, ByteReader& r, uint32_t remaining) {
    MqttPacket p;
    uint8_t type_nibble = first >> 4;
    uint8_t flags = first & 0x0F;
    size_t body_end = r.pos() + remaining;

    switch (type_nibble) {
        case 1: {
            p.type = PacketType::Connect;
            if (flags != 0) throw WireError(WireError::Kind::Format, "reserved flag bits set on CONNECT");
            std::string proto = read_string(r);
            if (proto != "MQTT") throw WireError(WireError::Kind::Unsupported, "unknown protocol name: " + proto);
            uint8_t level = r.u8();
            if (level != 0x04) throw WireError(WireError::Kind::Unsupported, "unsupported protocol level");
            uint8_t connect_flags = r.u8();
            if (!(connect_flags & kConnectCleanSession))
                throw WireError(WireError::Kind::Unsupported, "only clean sessions are supported");
            if (connect_flags & ~kConnectCleanSession)
                throw WireError(WireError::Kind::Unsupported, "will/auth connect flags not supported");
            p.keepalive_s = r.u16be();
            p.client_id = read_string(r);
            break;
        }
        case 2:
            p.type = PacketType::Connack;
            if (flags != 0) throw WireError(WireError::Kind::Format, "reserved flag bits set on CONNACK");
            p.session_present = (r.u8() & 0x01) != 0;
            p.connack_code = r.u8();
            break;
        case 3: {
            p.type = PacketType::Publish;
            if (flags & 0x01) throw WireError(WireError::Kind::Unsupported, "retain is not supported");
            p.dup = (flags & 0x08) != 0;
            p.qos = (flags >> 1) & 0x03;
            if (p.qos > 1) throw WireError(WireError::Kind::Format, "malformed publish: qos must be 0 or 1");
            p.topic = read_string(r);
            if (p.qos == 1) {
                p.packet_id = r.u16be();
                if (p.packet_id == 0)
                    throw WireError(WireError::Kind::Format, "qos1 publish carries packet id 0");
            }
            if (body_end < r.pos()) throw WireError(WireError::Kind::Truncated, "publish body overruns packet");
            p.payload = r.bytes(body_end - r.pos());
            break;
        }
        case 4:
            p.type = PacketType::Puback;
            if (flags != 0) throw WireError(WireError::Kind::Format, "reserved flag bits set on PUBACK");
            p.packet_id = r.u16be();
            break;
        case 8: {
            p.type = PacketType::Subscribe;
            if (flags != 0x02) throw WireError(WireError::Kind::Format, "SUBSCRIBE flags must be 0010");
            p.packet_id = r.u16be();
            while (r.pos() < body_end) {
                std::string filter = read_string(r);
                uint8_t qos = r.u8();
                if (qos > 1) throw WireError(WireError::Kind::Format, "subscription qos must be 0 or 1");
                p.subscriptions.emplace_back(std::move(filter), qos);
            }
            if (p.subscriptions.empty())
                throw WireError(WireError::Kind::Format, "SUBSCRIBE carries no filters");
            break;
        }
        case 9:
            p.type = PacketType::Suback;
            if (flags != 0) throw WireError(WireError::Kind::Format, "reserved flag bits set on SUBACK");
            p.packet_id = r.u16be();
            while (r.pos() < body_end) p.return_codes.push_back(r.u8());
            break;
        case 12:
            p.type = PacketType::Pingreq;
            if (flags != 0) throw WireError(WireError::Kind::Format, "reserved flag bits set on PINGREQ");
            break;
        case 13:
            p.type = PacketType::Pingresp;
            if (flags != 0) throw WireError(WireError::Kind::Format, "reserved flag bits set on PINGRESP");
            break;
        case 14:
            p.type = PacketType::Disconnect;
            if (flags != 0) throw WireError(WireError::Kind::Format, "reserved flag bits set on DISCONNECT");
            break;
        default:
            throw WireError(WireError::Kind::Unsupported, "unknown packet type nibble");
    }

    if (r.pos() != body_end)
        throw WireError(WireError::Kind::Format, "packet body length mismatch");
    return p;
}

}  // namespace

MqttPacket decode_packet(const std::vector<uint8_t>& bytes) {
    ByteReader r(bytes);
    uint8_t first = r.u8();
    uint32_t remaining = decode_remaining_length(r);
    if (r.remaining() < remaining)
        throw WireError(WireError::Kind::Truncated, "packet shorter than remaining length");
    return decode_body(first, r, remaining);
}

void PacketDeframer::feed(const uint8_t* data, size_t n) { buf_.insert(buf_.end(), data, data + n); }

std::optional<MqttPacket> PacketDeframer::pop() {
    if (buf_.size() < 2) return std::nullopt;
    // Parse the varint; an incomplete varint means "wait for more bytes".
    uint32_t remaining = 0;
    uint32_t multiplier = 1;
    size_t header_len = 1;
    bool complete = false;
    for (size_t i = 1; i < buf_.size() && i <= 4; ++i) {
        uint8_t digit = buf_[i];
        remaining += static_cast<uint32_t>(digit & 0x7F) * multiplier;
        multiplier *= 128;
        ++header_len;
        if (!(digit & 0x80)) {
            complete = true;
            break;
        }
        if (i == 4) throw WireError(WireError::Kind::Format, "malformed remaining-length varint");
    }
    if (!complete) {
        if (buf_.size() >= 5) throw WireError(WireError::Kind::Format, "malformed remaining-length varint");
        return std::nullopt;
    }
    if (buf_.size() < header_len + remaining) return std::nullopt;

    std::vector<uint8_t> packet(buf_.begin(), buf_.begin() + static_cast<long>(header_len + remaining));
    buf_.erase(buf_.begin(), buf_.begin() + static_cast<long>(header_len + remaining));
    return decode_packet(packet);
}

bool valid_topic(const std::string& topic) {
    if (topic.empty()) return false;
    for (char c : topic)
        if (c == '#' || c == '+') return false;
    return true;
}

bool valid_filter(const std::string& filter) {
    if (filter.empty()) return false;
    // '#' only as the entire final segment; '+' is outside this subset.
    for (size_t i = 0; i < filter.size(); ++i) {
        if (filter[i] == '+') return false;
        if (filter[i] == '#') {
            bool last = (i == filter.size() - 1);
            bool own_segment = (i == 0) || (filter[i - 1] == '/');
            if (!last || !own_segment) return false;
        }
    }
    return true;
}

bool topic_matches(const std::string& filter, const std::string& topic) {
    auto split = [](const std::string& s) {
        std::vector<std::string> parts;
        size_t start = 0;
        while (true) {
            size_t slash = s.find('/', start);
            if (slash == std::string::npos) {
                parts.push_back(s.substr(start));
                break;
            }
            parts.push_back(s.substr(start, slash - start));
            start = slash + 1;
        }
        return parts;
    };
    const auto f = split(filter);
    const auto t = split(topic);
    for (size_t i = 0; i < f.size(); ++i) {
        if (f[i] == "#") return true;  // valid_filter guarantees '#' is the final segment
        if (i >= t.size() || f[i] != t[i]) return false;
    }
    return f.size() == t.size();
}

}  // namespace e5sh::mqtt
