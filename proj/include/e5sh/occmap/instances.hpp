#pragma once

#include <cstdint>
#include <optional>
#include <unordered_set>
#include <vector>

#include "e5sh/occmap/octree.hpp"
#include "e5sh/types.hpp"

namespace e5sh::occmap {

// One connected component of strawberry pixels.
struct StrawberryInstance {
    uint32_t instance_id = 0;
    std::vector<uint32_t> pixels;  // row-major indices, ascending
    double centroid_u = 0;
    double centroid_v = 0;
    bool is_target = false;

    size_t area() const { return pixels.size(); }
};

// 8-connected components of Strawberry pixels, discovery (scan) order ids,
// components under min_area discarded. The target is the component whose
// centroid lies nearest the image center; ties prefer the larger area, then
// the lower instance id. Exactly one target whenever any instance survives.
std::vector<StrawberryInstance> extract_instances(const LabeledMask& mask, size_t min_area = 20);

// The two maps the planner consumes. Obstacles hold rigid structure plus
// canopy; canopy-only voxels carry a "soft" flag (pushable). The strawberry
// map holds the target instance only: non-target berries appear in neither.
struct PlanningMaps {
    OctreeMap obstacles;
    OctreeMap strawberries;
    std::unordered_set<uint64_t> soft_voxels;

    PlanningMaps(OctreeParams params) : obstacles(params), strawberries(params) {}

    bool is_soft(const Point3& p) const {
        auto key = obstacles.key_of(p);
        return key && soft_voxels.count(*key) > 0;
    }
};

PlanningMaps build_planning_maps(const LabeledMask& mask, const std::vector<uint16_t>& depth,
                                 const CameraIntrinsics& intrinsics,
                                 const std::optional<StrawberryInstance>& target,
                                 OctreeParams params = {});

}  // namespace e5sh::occmap
