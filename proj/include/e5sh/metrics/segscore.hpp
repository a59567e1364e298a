#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "e5sh/types.hpp"

namespace e5sh::metrics {

// Pixel-wise confusion counts for one class.
struct ClassCounts {
    uint64_t tp = 0;
    uint64_t fp = 0;
    uint64_t fn = 0;
};

struct PixelConfusion {
    std::array<ClassCounts, kNumClasses> per_class{};
    uint64_t total_pixels = 0;

    void accumulate(const PixelConfusion& other);
};

// Per-pixel comparison of predicted vs ground-truth classes.
// Throws std::invalid_argument on dimension mismatch.
PixelConfusion confusion(const LabeledMask& pred, const LabeledMask& gt);

struct PrfScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    // True when a 0/0 ratio was coerced to 0 (no predicted and/or no
    // ground-truth pixels for the class).
    bool degenerate = false;
};

PrfScore prf(const ClassCounts& c);
std::array<PrfScore, kNumClasses> scores(const PixelConfusion& conf);

// Confidence thresholds for AP/AR: {0.50, 0.55, ..., 0.95}.
std::vector<double> default_thresholds();

struct ApArScore {
    double ap = 0.0;
    double ar = 0.0;
};

// At each threshold, predicted pixels whose confidence (byte / 255) falls
// below it are scored as Background; AP/AR are the means of the per-threshold
// precision/recall. Throws std::invalid_argument on empty thresholds or
// dimension mismatch.
std::array<ApArScore, kNumClasses> ap_ar(const LabeledMask& pred, const LabeledMask& gt,
                                         const std::vector<double>& thresholds);

}  // namespace e5sh::metrics
