#include "e5sh/perception/sync.hpp"

#include <cstdlib>
#include <stdexcept>

namespace e5sh::perception {

Frame combine(const SyncedPair& pair, const CameraIntrinsics& intrinsics) {
    if (pair.rgb.width != pair.depth.width || pair.rgb.height != pair.depth.height)
        throw std::invalid_argument("synced pair: rgb and depth dimensions differ");
    Frame f;
    f.frame_id = pair.rgb.frame_id;
    f.capture_ts_ns = pair.rgb.capture_ts_ns;
    f.width = pair.rgb.width;
    f.height = pair.rgb.height;
    f.rgb = envelope_rgb(pair.rgb);
    f.depth = envelope_depth(pair.depth);
    f.intrinsics = intrinsics;
    f.validate();
    return f;
}

FrameSynchronizer::FrameSynchronizer(SyncConfig cfg) : cfg_(cfg) {
    if (cfg_.queue_depth == 0) throw std::invalid_argument("synchronizer: queue depth must be positive");
    if (cfg_.tolerance_ns < 0) throw std::invalid_argument("synchronizer: tolerance must be non-negative");
}

std::optional<SyncedPair> FrameSynchronizer::push(Envelope env) {
    std::deque<Envelope>* q = nullptr;
    switch (env.channel) {
        case Channel::Rgb: q = &rgb_; break;
        case Channel::Depth: q = &depth_; break;
        default: throw std::invalid_argument("synchronizer: only rgb and depth channels are pairable");
    }
    if (q->size() >= cfg_.queue_depth) {
        q->pop_front();
        ++evictions_;
    }
    q->push_back(std::move(env));
    return try_pair();
}

std::optional<SyncedPair> FrameSynchronizer::try_pair() {
    // Oldest admissible pair: walk RGB in arrival order and, for the first
    // entry with any partner inside the tolerance window, take its oldest
    // admissible depth. One push adds one item, so at most one new pair can
    // exist here.
    for (auto r = rgb_.begin(); r != rgb_.end(); ++r) {
        for (auto d = depth_.begin(); d != depth_.end(); ++d) {
            if (std::llabs(r->capture_ts_ns - d->capture_ts_ns) <= cfg_.tolerance_ns) {
                SyncedPair pair{std::move(*r), std::move(*d)};
                rgb_.erase(r);
                depth_.erase(d);
                ++pairs_emitted_;
                return pair;
            }
        }
    }
    return std::nullopt;
}

}  // namespace e5sh::perception
