#pragma once

#include <array>
#include <cstdint>

#include "e5sh/types.hpp"

namespace e5sh::harness {

// Recipe for one synthetic polytunnel scene. Shape sizes scale with the
// image width so the same spec works at thumbnail and camera resolution;
// depths are meters in the camera frame. The per-scene tolerance bands are
// what the rejection loop enforces; dataset means land well inside them.
struct SceneSpec {
    uint16_t width = 848;
    uint16_t height = 480;

    // Visible-fraction targets per class (background takes the remainder).
    double target_strawberry = 0.022;
    double target_canopy = 0.333;
    double target_rigid = 0.359;
    double tol_strawberry = 0.005;  // per-scene half-band
    double tol_canopy = 0.012;
    double tol_rigid = 0.012;

    // Size ranges as fractions of the image width.
    double strawberry_radius_min = 0.012;
    double strawberry_radius_max = 0.028;
    double canopy_radius_min = 0.035;
    double canopy_radius_max = 0.105;
    double rigid_side_min = 0.02;
    double rigid_side_max = 0.22;

    // Depth bands (meters): strawberries nearest, then canopy, then rigid
    // structure, background farthest. Bands must not overlap so visible
    // fractions settle class by class.
    double strawberry_depth_min = 0.45;
    double strawberry_depth_max = 0.75;
    double canopy_depth_min = 0.80;
    double canopy_depth_max = 1.20;
    double rigid_depth_min = 1.30;
    double rigid_depth_max = 1.90;
    double background_depth = 3.0;

    double noise_sigma = 8.0;  // per-channel RGB noise
    int max_rounds = 100;      // scene resamples before giving up

    void validate() const;
};

// One generated scene: sensor data plus its exact ground truth.
struct Scene {
    Frame frame;
    LabeledMask truth;
};

// Per-class visible pixel fraction of a mask, indexed by ClassId.
std::array<double, kNumClasses> class_fractions(const LabeledMask& mask);

// Deterministic scene synthesis: identical (spec, seed, index) give an
// identical scene. Throws std::runtime_error when the abundance targets
// stay unreachable after max_rounds resamples.
Scene generate_scene(const SceneSpec& spec, uint64_t seed, uint64_t scene_index);

// Intrinsics used for generated scenes: focal length scales with width so
// the field of view is resolution-independent.
CameraIntrinsics scene_intrinsics(uint16_t width, uint16_t height);

}  // namespace e5sh::harness
