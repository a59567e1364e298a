#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace e5sh {

// The four semantic classes every mask pixel carries. Wire value == enum value.
enum class ClassId : uint8_t {
    Strawberry = 0,
    Canopy = 1,
    RigidObstacle = 2,
    Background = 3,
};

constexpr int kNumClasses = 4;

inline const char* class_name(ClassId c) {
    switch (c) {
        case ClassId::Strawberry: return "strawberry";
        case ClassId::Canopy: return "canopy";
        case ClassId::RigidObstacle: return "rigid_obstacle";
        case ClassId::Background: return "background";
    }
    return "?";
}

struct CameraIntrinsics {
    double fx = 0;
    double fy = 0;
    double cx = 0;
    double cy = 0;
    uint16_t width = 0;
    uint16_t height = 0;

    void validate() const {
        if (fx <= 0 || fy <= 0) throw std::invalid_argument("intrinsics: focal lengths must be positive");
        if (cx < 0 || cx >= width || cy < 0 || cy >= height)
            throw std::invalid_argument("intrinsics: principal point outside image");
    }

    bool operator==(const CameraIntrinsics&) const = default;
};

// One RGB-D sensor sample. Depth is millimeters, 0 = no measurement.
struct Frame {
    uint64_t frame_id = 0;
    int64_t capture_ts_ns = 0;
    uint16_t width = 0;
    uint16_t height = 0;
    std::vector<uint8_t> rgb;     // 3 bytes/pixel, row-major
    std::vector<uint16_t> depth;  // 1 value/pixel, row-major, millimeters
    CameraIntrinsics intrinsics;

    size_t pixel_count() const { return static_cast<size_t>(width) * height; }

    void validate() const {
        if (rgb.size() != pixel_count() * 3) throw std::invalid_argument("frame: rgb size mismatch");
        if (depth.size() != pixel_count()) throw std::invalid_argument("frame: depth size mismatch");
    }
};

// Per-pixel 4-class segmentation with 8-bit confidence. Oracle masks carry 255.
struct LabeledMask {
    uint16_t width = 0;
    uint16_t height = 0;
    std::vector<ClassId> classes;      // row-major
    std::vector<uint8_t> confidence;   // quantized [0,1] -> 0..255

    size_t pixel_count() const { return static_cast<size_t>(width) * height; }

    void validate() const {
        if (classes.size() != pixel_count()) throw std::invalid_argument("mask: class buffer size mismatch");
        if (confidence.size() != pixel_count()) throw std::invalid_argument("mask: confidence buffer size mismatch");
    }

    static LabeledMask filled(uint16_t w, uint16_t h, ClassId c, uint8_t conf = 255) {
        LabeledMask m;
        m.width = w;
        m.height = h;
        m.classes.assign(static_cast<size_t>(w) * h, c);
        m.confidence.assign(static_cast<size_t>(w) * h, conf);
        return m;
    }

    bool operator==(const LabeledMask&) const = default;
};

}  // namespace e5sh
