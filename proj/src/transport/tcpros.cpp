#include "e5sh/transport/tcpros.hpp"

#include <algorithm>

#include "e5sh/transport/md5.hpp"

namespace e5sh::transport {

const char* const kRequiredHeaderKeys[4] = {"callerid", "topic", "type", "md5sum"};

std::vector<uint8_t> encode_header_fields(const HeaderMap& fields) {
    // Required keys that are present go first, in their canonical order, then
    // everything else lexicographically (std::map iteration order).
    std::vector<std::pair<std::string, std::string>> ordered;
    for (const char* key : kRequiredHeaderKeys) {
        auto it = fields.find(key);
        if (it != fields.end()) ordered.emplace_back(it->first, it->second);
    }
    for (const auto& [k, v] : fields) {
        if (std::find(std::begin(kRequiredHeaderKeys), std::end(kRequiredHeaderKeys), k) !=
            std::end(kRequiredHeaderKeys))
            continue;
        ordered.emplace_back(k, v);
    }

    ByteWriter body;
    for (const auto& [k, v] : ordered) {
        std::string field = k + "=" + v;
        body.u32le(static_cast<uint32_t>(field.size()));
        body.ascii(field);
    }
    ByteWriter out;
    out.u32le(static_cast<uint32_t>(body.size()));
    out.bytes(body.take());
    return out.take();
}

std::vector<uint8_t> encode_header(const HeaderMap& fields) {
    for (const char* key : kRequiredHeaderKeys)
        if (!fields.count(key))
            throw WireError(WireError::Kind::Format, std::string("header missing required key: ") + key);
    return encode_header_fields(fields);
}

HeaderMap decode_header(const std::vector<uint8_t>& bytes) {
    ByteReader r(bytes);
    uint32_t total = r.u32le();
    if (r.remaining() < total) throw WireError(WireError::Kind::Truncated, "header shorter than declared length");

    HeaderMap out;
    size_t end = r.pos() + total;
    while (r.pos() < end) {
        if (end - r.pos() < 4) throw WireError(WireError::Kind::Format, "dangling bytes after last header field");
        uint32_t len = r.u32le();
        if (len == 0) throw WireError(WireError::Kind::Format, "empty header field");
        if (r.pos() + len > end)
            throw WireError(WireError::Kind::Truncated, "header field overruns declared total length");
        std::string field = r.ascii(len);
        auto eq = field.find('=');
        if (eq == std::string::npos || eq == 0)
            throw WireError(WireError::Kind::Format, "header field is not key=value: " + field);
        auto [it, inserted] = out.emplace(field.substr(0, eq), field.substr(eq + 1));
        if (!inserted) throw WireError(WireError::Kind::Format, "duplicate header key: " + it->first);
    }
    return out;
}

std::vector<uint8_t> frame_message(const std::vector<uint8_t>& payload) {
    if (payload.size() > kMaxMessageSize)
        throw WireError(WireError::Kind::TooLarge, "message exceeds 64 MiB frame limit");
    ByteWriter w;
    w.u32le(static_cast<uint32_t>(payload.size()));
    w.bytes(payload);
    return w.take();
}

void MessageDeframer::feed(const uint8_t* data, size_t n) { buf_.insert(buf_.end(), data, data + n); }

std::optional<std::vector<uint8_t>> MessageDeframer::pop() {
    if (buf_.size() < 4) return std::nullopt;
    uint32_t len = 0;
    for (int i = 0; i < 4; ++i) len |= static_cast<uint32_t>(buf_[static_cast<size_t>(i)]) << (8 * i);
    if (len > kMaxMessageSize)
        throw WireError(WireError::Kind::TooLarge, "framed message exceeds 64 MiB limit");
    if (buf_.size() < 4 + static_cast<size_t>(len)) return std::nullopt;
    std::vector<uint8_t> payload(buf_.begin() + 4, buf_.begin() + 4 + len);
    buf_.erase(buf_.begin(), buf_.begin() + 4 + len);
    return payload;
}

HeaderMap EndpointConfig::make_header() const {
    HeaderMap h = extra;
    h["callerid"] = callerid;
    h["topic"] = topic;
    h["type"] = type;
    h["md5sum"] = md5_hex(type);
    return h;
}

PublisherConnection::PublisherConnection(Duplex* duplex, EndpointConfig cfg)
    : duplex_(duplex), cfg_(std::move(cfg)) {
    duplex_->set_receiver([this](std::vector<uint8_t> msg, int64_t) { handle_message(std::move(msg)); });
}

void PublisherConnection::handle_message(std::vector<uint8_t> msg) {
    if (state_ == EndpointState::Active) {
        // A subscriber that never saw our header reply retransmits its own
        // header; re-answer so the handshake can complete. Data never flows
        // subscriber -> publisher, so anything else is ignored.
        try {
            HeaderMap h = decode_header(msg);
            if (h.count("topic") && h["topic"] == cfg_.topic)
                duplex_->send(encode_header(cfg_.make_header()));
        } catch (const WireError&) {
        }
        return;
    }
    if (state_ != EndpointState::AwaitingHeader) return;  // failed connections stay failed
    std::string reason;
    try {
        HeaderMap h = decode_header(msg);
        for (const char* key : kRequiredHeaderKeys)
            if (!h.count(key)) reason = std::string("missing required key: ") + key;
        if (reason.empty()) {
            if (h["topic"] != cfg_.topic)
                reason = "topic mismatch: " + h["topic"] + " vs " + cfg_.topic;
            else if (h["type"] != cfg_.type)
                reason = "type mismatch: " + h["type"] + " vs " + cfg_.type;
            else if (h["md5sum"] != md5_hex(cfg_.type))
                reason = "md5sum mismatch for type " + cfg_.type;
        }
        peer_header_ = std::move(h);
    } catch (const WireError& e) {
        reason = e.what();
    }

    if (reason.empty()) {
        state_ = EndpointState::Active;
        duplex_->send(encode_header(cfg_.make_header()));
    } else {
        state_ = EndpointState::Failed;
        reject_reason_ = reason;
        duplex_->send(encode_header_fields({{"error", reason}}));
    }
}

void PublisherConnection::publish(const std::vector<uint8_t>& payload) {
    if (state_ != EndpointState::Active) return;
    auto id = duplex_->send(frame_message(payload));
    ++sent_;
    if (id) in_flight_ids_.push_back(*id);
    enforce_queue_depth();
}

void PublisherConnection::enforce_queue_depth() {
    // Oldest undelivered frames are dropped once the channel backlog exceeds
    // the queue depth, the way a bounded publisher queue sheds load.
    while (duplex_->in_flight() > cfg_.queue_depth && !in_flight_ids_.empty()) {
        uint64_t oldest = in_flight_ids_.front();
        in_flight_ids_.pop_front();
        if (duplex_->cancel(oldest)) ++dropped_overflow_;
    }
}

PublisherConnection& TcprosPublisher::accept(Duplex* duplex) {
    connections_.push_back(std::make_unique<PublisherConnection>(duplex, cfg_));
    return *connections_.back();
}

void TcprosPublisher::publish(const std::vector<uint8_t>& payload) {
    for (auto& conn : connections_) conn->publish(payload);
}

size_t TcprosPublisher::active_count() const {
    size_t n = 0;
    for (const auto& conn : connections_)
        if (conn->state() == EndpointState::Active) ++n;
    return n;
}

TcprosSubscriber::TcprosSubscriber(Duplex* duplex, EndpointConfig cfg, MessageFn on_message)
    : duplex_(duplex), cfg_(std::move(cfg)), on_message_(std::move(on_message)) {
    duplex_->set_receiver([this](std::vector<uint8_t> msg, int64_t now) { handle_message(std::move(msg), now); });
}

void TcprosSubscriber::start() { duplex_->send(encode_header(cfg_.make_header())); }

void TcprosSubscriber::handle_message(std::vector<uint8_t> msg, int64_t now_ns) {
    if (state_ == EndpointState::Failed) return;

    if (state_ == EndpointState::AwaitingHeader) {
        std::string reason;
        try {
            HeaderMap h = decode_header(msg);
            if (h.count("error")) {
                reason = h["error"];
            } else if (h["type"] != cfg_.type || h["md5sum"] != md5_hex(cfg_.type)) {
                reason = "publisher type/md5sum mismatch";
            }
            peer_header_ = std::move(h);
        } catch (const WireError& e) {
            reason = e.what();
        }
        if (reason.empty()) {
            state_ = EndpointState::Active;
        } else {
            state_ = EndpointState::Failed;
            reject_reason_ = reason;
        }
        return;
    }

    // Active: one datagram = one framed message.
    ByteReader r(msg);
    uint32_t len = r.u32le();
    if (len > kMaxMessageSize) throw WireError(WireError::Kind::TooLarge, "frame exceeds 64 MiB limit");
    auto payload = r.bytes(len);
    ++received_;
    if (on_message_) on_message_(std::move(payload), now_ns);
}

}  // namespace e5sh::transport
