#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "e5sh/bytes.hpp"
#include "e5sh/transport/duplex.hpp"

namespace e5sh::transport {

using HeaderMap = std::map<std::string, std::string>;

// Connection header codec. Wire layout: 4-byte little-endian total length,
// then per field 4-byte little-endian length + "key=value". Required fields
// (callerid, topic, type, md5sum) come first in that order, remaining keys
// lexicographically.
extern const char* const kRequiredHeaderKeys[4];

std::vector<uint8_t> encode_header_fields(const HeaderMap& fields);  // no required-key check
std::vector<uint8_t> encode_header(const HeaderMap& fields);         // validates required keys
HeaderMap decode_header(const std::vector<uint8_t>& bytes);

constexpr size_t kMaxMessageSize = 64ull * 1024 * 1024;

// Message framing: 4-byte little-endian length + payload.
std::vector<uint8_t> frame_message(const std::vector<uint8_t>& payload);

// Incremental frame parser for byte-stream transports (live TCP). Feed raw
// chunks; pop whole payloads.
class MessageDeframer {
public:
    void feed(const uint8_t* data, size_t n);
    void feed(const std::vector<uint8_t>& chunk) { feed(chunk.data(), chunk.size()); }
    std::optional<std::vector<uint8_t>> pop();
    size_t buffered() const { return buf_.size(); }

private:
    std::vector<uint8_t> buf_;
};

struct EndpointConfig {
    std::string callerid;
    std::string topic;
    std::string type;            // message type name; md5sum derives from it
    size_t queue_depth = 30;     // outgoing frames kept in flight per connection
    HeaderMap extra;             // additional header fields

    HeaderMap make_header() const;
};

enum class EndpointState { AwaitingHeader, Active, Failed };

// Publisher side of one subscriber connection. The subscriber speaks first;
// we answer with our own header or an {error=...} header on mismatch.
class PublisherConnection {
public:
    PublisherConnection(Duplex* duplex, EndpointConfig cfg);

    void publish(const std::vector<uint8_t>& payload);

    EndpointState state() const { return state_; }
    const HeaderMap& peer_header() const { return peer_header_; }
    const std::string& reject_reason() const { return reject_reason_; }
    uint64_t sent() const { return sent_; }
    uint64_t dropped_overflow() const { return dropped_overflow_; }

private:
    void handle_message(std::vector<uint8_t> msg);
    void enforce_queue_depth();

    Duplex* duplex_;
    EndpointConfig cfg_;
    EndpointState state_ = EndpointState::AwaitingHeader;
    HeaderMap peer_header_;
    std::string reject_reason_;
    std::deque<uint64_t> in_flight_ids_;
    uint64_t sent_ = 0;
    uint64_t dropped_overflow_ = 0;
};

// Topic publisher: fans every payload out to all active connections.
class TcprosPublisher {
public:
    explicit TcprosPublisher(EndpointConfig cfg) : cfg_(std::move(cfg)) {}

    PublisherConnection& accept(Duplex* duplex);
    void publish(const std::vector<uint8_t>& payload);

    const EndpointConfig& config() const { return cfg_; }
    size_t connection_count() const { return connections_.size(); }
    size_t active_count() const;

private:
    EndpointConfig cfg_;
    std::vector<std::unique_ptr<PublisherConnection>> connections_;
};

class TcprosSubscriber {
public:
    using MessageFn = std::function<void(std::vector<uint8_t> payload, int64_t now_ns)>;

    TcprosSubscriber(Duplex* duplex, EndpointConfig cfg, MessageFn on_message);

    void start();  // sends our header to the publisher

    EndpointState state() const { return state_; }
    const HeaderMap& peer_header() const { return peer_header_; }
    const std::string& reject_reason() const { return reject_reason_; }
    uint64_t received() const { return received_; }

private:
    void handle_message(std::vector<uint8_t> msg, int64_t now_ns);

    Duplex* duplex_;
    EndpointConfig cfg_;
    MessageFn on_message_;
    EndpointState state_ = EndpointState::AwaitingHeader;
    HeaderMap peer_header_;
    std::string reject_reason_;
    uint64_t received_ = 0;
};

}  // namespace e5sh::transport
