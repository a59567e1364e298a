#pragma once

#include <cstdint>
#include <vector>

#include "e5sh/bytes.hpp"
#include "e5sh/types.hpp"

namespace e5sh {

// Frame/mask envelope, little-endian throughout:
//   'E' '5' 'S' 'H' | version 0x01 | channel | encoding |
//   frame_id u64 | capture_ts u64 | width u16 | height u16 |
//   payload_len u32 | payload
// Channel 1=RGB (3 B/px), 2=Depth (u16 mm/px), 3=Mask (class+confidence B/px).
// RLE payload is [run u16][pixel unit] with runs never crossing row boundaries.

enum class Channel : uint8_t { Rgb = 1, Depth = 2, Mask = 3 };
enum class Encoding : uint8_t { Raw = 0, Rle = 1 };

constexpr size_t kEnvelopeHeaderSize = 31;

struct Envelope {
    Channel channel = Channel::Rgb;
    Encoding encoding = Encoding::Raw;
    uint64_t frame_id = 0;
    int64_t capture_ts_ns = 0;
    uint16_t width = 0;
    uint16_t height = 0;
    std::vector<uint8_t> payload;  // decoded to Raw layout regardless of wire encoding
};

std::vector<uint8_t> encode_frame(const Frame& frame, Channel channel, Encoding encoding = Encoding::Raw);
std::vector<uint8_t> encode_mask(const LabeledMask& mask, uint64_t frame_id, int64_t capture_ts_ns,
                                 Encoding encoding = Encoding::Rle);

// Inverse of the encoders. Validates magic, version, channel/encoding bytes and
// payload length; tolerates trailing bytes after the payload (message padding).
Envelope decode_envelope(const std::vector<uint8_t>& bytes);

// Reassemble typed buffers from a decoded envelope.
std::vector<uint8_t> envelope_rgb(const Envelope& env);
std::vector<uint16_t> envelope_depth(const Envelope& env);
LabeledMask envelope_mask(const Envelope& env);

}  // namespace e5sh
