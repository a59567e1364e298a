#pragma once

#include <cstdint>
#include <deque>
#include <optional>

#include "e5sh/codec.hpp"
#include "e5sh/types.hpp"

namespace e5sh::perception {

// A time-aligned RGB + depth pair as emitted by the synchronizer.
struct SyncedPair {
    Envelope rgb;
    Envelope depth;

    // The pair is stamped with the RGB frame's identity.
    uint64_t frame_id() const { return rgb.frame_id; }
    int64_t capture_ts_ns() const { return rgb.capture_ts_ns; }
};

// Combine a synchronized pair plus out-of-band intrinsics into one sensor
// sample. Throws std::invalid_argument when the two images disagree on size.
Frame combine(const SyncedPair& pair, const CameraIntrinsics& intrinsics);

struct SyncConfig {
    size_t queue_depth = 30;
    int64_t tolerance_ns = 10'000'000;  // 10 ms
};

// Pairs two independently arriving image streams by capture timestamp.
// Each buffered item is consumed by at most one pair; when a queue is full
// the oldest entry is evicted (counted, never an error).
class FrameSynchronizer {
  public:
    explicit FrameSynchronizer(SyncConfig cfg = {});

    // Accepts Channel::Rgb or Channel::Depth envelopes; anything else throws.
    // Returns the oldest admissible pair if the push completes one.
    std::optional<SyncedPair> push(Envelope env);

    size_t rgb_pending() const { return rgb_.size(); }
    size_t depth_pending() const { return depth_.size(); }
    uint64_t evictions() const { return evictions_; }
    uint64_t pairs_emitted() const { return pairs_emitted_; }

  private:
    std::optional<SyncedPair> try_pair();

    SyncConfig cfg_;
    std::deque<Envelope> rgb_;
    std::deque<Envelope> depth_;
    uint64_t evictions_ = 0;
    uint64_t pairs_emitted_ = 0;
};

}  // namespace e5sh::perception
