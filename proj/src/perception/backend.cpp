#include "e5sh/perception/backend.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "e5sh/sim/rng.hpp"

namespace e5sh::perception {

OracleBackend::OracleBackend(Lookup lookup) : lookup_(std::move(lookup)) {
    if (!lookup_) throw std::invalid_argument("oracle backend: lookup must be callable");
}

SegmentationOutput OracleBackend::segment(const Frame& frame) {
    SegmentationOutput out;
    auto mask = lookup_(frame.frame_id);
    if (!mask) {
        out.error = "no ground truth stored for frame " + std::to_string(frame.frame_id);
        return out;
    }
    out.mask = std::move(*mask);
    return out;
}

std::pair<ClassId, double> heuristic_classify(uint8_t r, uint8_t g, uint8_t b) {
    double best = std::numeric_limits<double>::infinity();
    double second = std::numeric_limits<double>::infinity();
    int best_idx = 0;
    for (int i = 0; i < kNumClasses; ++i) {
        double dr = static_cast<double>(r) - kClassPalette[i][0];
        double dg = static_cast<double>(g) - kClassPalette[i][1];
        double db = static_cast<double>(b) - kClassPalette[i][2];
        double d = std::sqrt(dr * dr + dg * dg + db * db);
        if (d < best) {  // strict < keeps the lower ClassId on exact ties
            second = best;
            best = d;
            best_idx = i;
        } else if (d < second) {
            second = d;
        }
    }
    double conf = (best + second) > 0 ? second / (best + second) : 1.0;
    return {static_cast<ClassId>(best_idx), conf};
}

LabeledMask heuristic_segment(uint16_t width, uint16_t height, const std::vector<uint8_t>& rgb) {
    size_t pixels = static_cast<size_t>(width) * height;
    if (rgb.size() != pixels * 3) throw std::invalid_argument("heuristic segment: rgb size mismatch");
    LabeledMask m;
    m.width = width;
    m.height = height;
    m.classes.resize(pixels);
    m.confidence.resize(pixels);
    for (size_t i = 0; i < pixels; ++i) {
        auto [cls, conf] = heuristic_classify(rgb[i * 3], rgb[i * 3 + 1], rgb[i * 3 + 2]);
        m.classes[i] = cls;
        m.confidence[i] = static_cast<uint8_t>(std::lround(conf * 255.0));
    }
    return m;
}

SegmentationOutput HeuristicBackend::segment(const Frame& frame) {
    SegmentationOutput out;
    out.mask = heuristic_segment(frame.width, frame.height, frame.rgb);
    return out;
}

LatencyModel LatencyModel::defaults() {
    LatencyModel lm;
    auto add = [&lm](const char* model, const char* platform, double mean_ms) {
        lm.table[{model, platform}] = LatencyEntry{mean_ms, 0.1 * mean_ms};
    };
    add("detectron2", "edge", 82.0);
    add("detectron2", "njxn", 1533.4);  // 18.7x the edge latency
    add("d2go8", "edge", 30.0);
    add("d2go8", "njxn", 129.0);  // 4.3x
    add("d2go32", "edge", 33.0);
    add("d2go32", "njxn", 145.2);  // 4.4x
    return lm;
}

bool LatencyModel::contains(const std::string& model, const std::string& platform) const {
    return table.count({model, platform}) > 0;
}

const LatencyEntry& LatencyModel::at(const std::string& model, const std::string& platform) const {
    auto it = table.find({model, platform});
    if (it == table.end())
        throw std::invalid_argument("latency model: no entry for model='" + model + "' platform='" +
                                    platform + "'");
    return it->second;
}

int64_t sample_compute_delay(const LatencyModel& lm, const std::string& model,
                             const std::string& platform, std::mt19937_64& rng) {
    const LatencyEntry& e = lm.at(model, platform);
    std::normal_distribution<double> dist(e.mean_ms, e.stddev_ms);
    double ms = std::max(0.0, dist(rng));
    return static_cast<int64_t>(std::llround(ms * 1e6));
}

DelayedBackend::DelayedBackend(std::unique_ptr<SegmentationBackend> inner, LatencyModel lm,
                               std::string model, std::string platform, uint64_t seed)
    : inner_(std::move(inner)),
      lm_(std::move(lm)),
      model_(std::move(model)),
      platform_(std::move(platform)),
      rng_(sim::make_rng(seed, "compute_delay")) {
    if (!inner_) throw std::invalid_argument("delayed backend: inner backend required");
    lm_.at(model_, platform_);  // reject unknown keys at construction
}

SegmentationOutput DelayedBackend::segment(const Frame& frame) {
    SegmentationOutput out = inner_->segment(frame);
    out.compute_ns += sample_compute_delay(lm_, model_, platform_, rng_);
    return out;
}

}  // namespace e5sh::perception
