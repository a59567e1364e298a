#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <utility>

#include "e5sh/types.hpp"

namespace e5sh::perception {

// Result of one segmentation run. `compute_ns` is the virtual compute time
// the caller must account for before the result becomes visible; plain
// backends report 0 and the Delayed wrapper adds its sampled latency.
struct SegmentationOutput {
    std::optional<LabeledMask> mask;  // empty => the run failed (goal aborts)
    int64_t compute_ns = 0;
    std::string error;  // set when mask is empty
};

class SegmentationBackend {
  public:
    virtual ~SegmentationBackend() = default;
    virtual SegmentationOutput segment(const Frame& frame) = 0;
};

// Returns the stored ground-truth mask for the frame, confidence untouched.
class OracleBackend : public SegmentationBackend {
  public:
    using Lookup = std::function<std::optional<LabeledMask>(uint64_t frame_id)>;
    explicit OracleBackend(Lookup lookup);
    SegmentationOutput segment(const Frame& frame) override;

  private:
    Lookup lookup_;
};

// Reference colors used by the nearest-color classifier, indexed by ClassId.
inline constexpr std::array<std::array<uint8_t, 3>, kNumClasses> kClassPalette = {{
    {200, 30, 40},    // strawberry
    {40, 140, 50},    // canopy
    {120, 120, 130},  // rigid obstacle
    {230, 230, 220},  // background
}};

// Nearest-palette-color class for one pixel plus confidence
// d2 / (d1 + d2) in [0.5, 1]; exact palette hit gives 1.0 and an exact tie
// gives 0.5 with the lower ClassId winning.
std::pair<ClassId, double> heuristic_classify(uint8_t r, uint8_t g, uint8_t b);

// Whole-image nearest-color segmentation; confidence quantized to 0..255.
LabeledMask heuristic_segment(uint16_t width, uint16_t height, const std::vector<uint8_t>& rgb);

class HeuristicBackend : public SegmentationBackend {
  public:
    SegmentationOutput segment(const Frame& frame) override;
};

// Mean/stddev of the compute-time distribution per (model, platform).
struct LatencyEntry {
    double mean_ms = 0;
    double stddev_ms = 0;
};

struct LatencyModel {
    std::map<std::pair<std::string, std::string>, LatencyEntry> table;

    // Measured means for the two platforms; dispersion defaults to 10% of
    // the mean since only central values were measured.
    static LatencyModel defaults();

    bool contains(const std::string& model, const std::string& platform) const;
    // Throws std::invalid_argument for an unknown (model, platform) key.
    const LatencyEntry& at(const std::string& model, const std::string& platform) const;
};

// One draw from the configured distribution, truncated at zero, in ns.
int64_t sample_compute_delay(const LatencyModel& lm, const std::string& model,
                             const std::string& platform, std::mt19937_64& rng);

// Wraps another backend and charges a sampled per-goal compute time.
class DelayedBackend : public SegmentationBackend {
  public:
    DelayedBackend(std::unique_ptr<SegmentationBackend> inner, LatencyModel lm, std::string model,
                   std::string platform, uint64_t seed);
    SegmentationOutput segment(const Frame& frame) override;

    const std::string& model() const { return model_; }
    const std::string& platform() const { return platform_; }

  private:
    std::unique_ptr<SegmentationBackend> inner_;
    LatencyModel lm_;
    std::string model_;
    std::string platform_;
    std::mt19937_64 rng_;
};

}  // namespace e5sh::perception
