#include "e5sh/codec.hpp"

#include <cstring>
#include <limits>

namespace e5sh {
namespace {

constexpr uint8_t kMagic[4] = {'E', '5', 'S', 'H'};
constexpr uint8_t kVersion = 0x01;

size_t unit_size(Channel ch) {
    switch (ch) {
        case Channel::Rgb: return 3;
        case Channel::Depth: return 2;
        case Channel::Mask: return 2;  // class byte + confidence byte
    }
    throw WireError(WireError::Kind::Unsupported, "bad channel");
}

// Row-bounded RLE over fixed-size pixel units.
std::vector<uint8_t> rle_encode(const std::vector<uint8_t>& raw, size_t unit, uint16_t width, uint16_t height) {
    ByteWriter w;
    for (uint16_t row = 0; row < height; ++row) {
        size_t base = static_cast<size_t>(row) * width * unit;
        size_t col = 0;
        while (col < width) {
            size_t run = 1;
            while (col + run < width &&
                   std::memcmp(&raw[base + col * unit], &raw[base + (col + run) * unit], unit) == 0) {
                ++run;
            }
            w.u16le(static_cast<uint16_t>(run));
            w.bytes(&raw[base + col * unit], unit);
            col += run;
        }
    }
    return w.take();
}

std::vector<uint8_t> rle_decode(ByteReader& r, size_t payload_len, size_t unit, uint16_t width, uint16_t height) {
    std::vector<uint8_t> out;
    out.reserve(static_cast<size_t>(width) * height * unit);
    size_t end = r.pos() + payload_len;
    size_t row_fill = 0;
    while (r.pos() < end) {
        uint16_t run = r.u16le();
        auto px = r.bytes(unit);
        if (run == 0) throw WireError(WireError::Kind::Format, "rle: zero-length run");
        row_fill += run;
        if (row_fill > width) throw WireError(WireError::Kind::Format, "rle: run crosses row boundary");
        if (row_fill == width) row_fill = 0;
        for (uint16_t i = 0; i < run; ++i) out.insert(out.end(), px.begin(), px.end());
    }
    if (r.pos() != end) throw WireError(WireError::Kind::Format, "rle: run overflows payload");
    if (out.size() != static_cast<size_t>(width) * height * unit)
        throw WireError(WireError::Kind::Truncated, "rle: decoded size mismatch");
    return out;
}

std::vector<uint8_t> encode_envelope(Channel ch, Encoding enc, uint64_t frame_id, int64_t ts,
                                     uint16_t width, uint16_t height, const std::vector<uint8_t>& raw) {
    std::vector<uint8_t> payload =
        (enc == Encoding::Rle) ? rle_encode(raw, unit_size(ch), width, height) : raw;
    if (payload.size() > std::numeric_limits<uint32_t>::max())
        throw WireError(WireError::Kind::TooLarge, "payload exceeds 32-bit length field");

    ByteWriter w;
    w.bytes(kMagic, 4);
    w.u8(kVersion);
    w.u8(static_cast<uint8_t>(ch));
    w.u8(static_cast<uint8_t>(enc));
    w.u64le(frame_id);
    w.u64le(static_cast<uint64_t>(ts));
    w.u16le(width);
    w.u16le(height);
    w.u32le(static_cast<uint32_t>(payload.size()));
    w.bytes(payload);
    return w.take();
}

}  // namespace

std::vector<uint8_t> encode_frame(const Frame& frame, Channel channel, Encoding encoding) {
    frame.validate();
    if (channel == Channel::Rgb) {
        return encode_envelope(channel, encoding, frame.frame_id, frame.capture_ts_ns,
                               frame.width, frame.height, frame.rgb);
    }
    if (channel == Channel::Depth) {
        std::vector<uint8_t> raw(frame.depth.size() * 2);
        for (size_t i = 0; i < frame.depth.size(); ++i) {
            raw[2 * i] = static_cast<uint8_t>(frame.depth[i] & 0xFF);
            raw[2 * i + 1] = static_cast<uint8_t>(frame.depth[i] >> 8);
        }
        return encode_envelope(channel, encoding, frame.frame_id, frame.capture_ts_ns,
                               frame.width, frame.height, raw);
    }
    throw WireError(WireError::Kind::Unsupported, "encode_frame: channel must be RGB or Depth");
}

std::vector<uint8_t> encode_mask(const LabeledMask& mask, uint64_t frame_id, int64_t capture_ts_ns,
                                 Encoding encoding) {
    mask.validate();
    std::vector<uint8_t> raw(mask.pixel_count() * 2);
    for (size_t i = 0; i < mask.pixel_count(); ++i) {
        raw[2 * i] = static_cast<uint8_t>(mask.classes[i]);
        raw[2 * i + 1] = mask.confidence[i];
    }
    return encode_envelope(Channel::Mask, encoding, frame_id, capture_ts_ns, mask.width, mask.height, raw);
}

Envelope decode_envelope(const std::vector<uint8_t>& bytes) {
    ByteReader r(bytes);
    if (r.remaining() < kEnvelopeHeaderSize)
        throw WireError(WireError::Kind::Truncated, "envelope shorter than header");
    auto magic = r.bytes(4);
    if (std::memcmp(magic.data(), kMagic, 4) != 0)
        throw WireError(WireError::Kind::Format, "bad magic");
    uint8_t version = r.u8();
    if (version != kVersion) throw WireError(WireError::Kind::Unsupported, "unknown version");
    uint8_t ch = r.u8();
    if (ch < 1 || ch > 3) throw WireError(WireError::Kind::Unsupported, "unknown channel byte");
    uint8_t enc = r.u8();
    if (enc > 1) throw WireError(WireError::Kind::Unsupported, "unknown encoding byte");

    Envelope env;
    env.channel = static_cast<Channel>(ch);
    env.encoding = static_cast<Encoding>(enc);
    env.frame_id = r.u64le();
    env.capture_ts_ns = static_cast<int64_t>(r.u64le());
    env.width = r.u16le();
    env.height = r.u16le();
    uint32_t payload_len = r.u32le();
    if (r.remaining() < payload_len)
        throw WireError(WireError::Kind::Truncated, "payload shorter than declared length");

    size_t unit = unit_size(env.channel);
    if (env.encoding == Encoding::Rle) {
        env.payload = rle_decode(r, payload_len, unit, env.width, env.height);
    } else {
        if (payload_len != static_cast<size_t>(env.width) * env.height * unit)
            throw WireError(WireError::Kind::Format, "raw payload length does not match dimensions");
        env.payload = r.bytes(payload_len);
    }

    if (env.channel == Channel::Mask) {
        for (size_t i = 0; i < env.payload.size(); i += 2)
            if (env.payload[i] > 3) throw WireError(WireError::Kind::Format, "mask class byte out of range");
    }
    return env;
}

std::vector<uint8_t> envelope_rgb(const Envelope& env) {
    if (env.channel != Channel::Rgb) throw WireError(WireError::Kind::Unsupported, "not an RGB envelope");
    return env.payload;
}

std::vector<uint16_t> envelope_depth(const Envelope& env) {
    if (env.channel != Channel::Depth) throw WireError(WireError::Kind::Unsupported, "not a depth envelope");
    std::vector<uint16_t> out(env.payload.size() / 2);
    for (size_t i = 0; i < out.size(); ++i)
        out[i] = static_cast<uint16_t>(env.payload[2 * i] | (env.payload[2 * i + 1] << 8));
    return out;
}

LabeledMask envelope_mask(const Envelope& env) {
    if (env.channel != Channel::Mask) throw WireError(WireError::Kind::Unsupported, "not a mask envelope");
    LabeledMask m;
    m.width = env.width;
    m.height = env.height;
    m.classes.resize(m.pixel_count());
    m.confidence.resize(m.pixel_count());
    for (size_t i = 0; i < m.pixel_count(); ++i) {
        m.classes[i] = static_cast<ClassId>(env.payload[2 * i]);
        m.confidence[i] = env.payload[2 * i + 1];
    }
    return m;
}

}  // namespace e5sh
