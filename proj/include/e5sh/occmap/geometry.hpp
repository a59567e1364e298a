#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <vector>

#include "e5sh/types.hpp"

namespace e5sh::occmap {

using Point3 = std::array<double, 3>;  // meters, camera frame

// Per-class back-projected points. All z > 0 by construction: zero depth
// means "no measurement" and is skipped.
struct PointCloud {
    ClassId cls = ClassId::Background;
    std::vector<Point3> points;
};

// Pinhole back-projection of every labeled pixel with a depth measurement:
//   z = d/1000,  x = (u - cx) * z / fx,  y = (v - cy) * z / fy.
// Only classes that produced at least one point appear in the result.
// Throws std::invalid_argument when mask, depth, and intrinsics disagree.
std::map<ClassId, PointCloud> project_depth(const LabeledMask& mask,
                                            const std::vector<uint16_t>& depth,
                                            const CameraIntrinsics& intrinsics);

// Back-projection of one pixel (no class routing); depth must be > 0.
Point3 project_pixel(uint16_t u, uint16_t v, uint16_t depth_mm, const CameraIntrinsics& intrinsics);

}  // namespace e5sh::occmap
