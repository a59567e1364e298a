#include "e5sh/occmap/geometry.hpp"

#include <stdexcept>

namespace e5sh::occmap {

Point3 project_pixel(uint16_t u, uint16_t v, uint16_t depth_mm, const CameraIntrinsics& k) {
    if (depth_mm == 0) throw std::invalid_argument("project_pixel: zero depth has no geometry");
    double z = depth_mm / 1000.0;
    return {(u - k.cx) * z / k.fx, (v - k.cy) * z / k.fy, z};
}

std::map<ClassId, PointCloud> project_depth(const LabeledMask& mask,
                                            const std::vector<uint16_t>& depth,
                                            const CameraIntrinsics& k) {
    mask.validate();
    k.validate();
    if (mask.width != k.width || mask.height != k.height)
        throw std::invalid_argument("project_depth: mask and intrinsics dimensions differ");
    if (depth.size() != mask.pixel_count())
        throw std::invalid_argument("project_depth: depth buffer size mismatch");

    std::map<ClassId, PointCloud> clouds;
    for (uint16_t v = 0; v < mask.height; ++v) {
        for (uint16_t u = 0; u < mask.width; ++u) {
            size_t i = static_cast<size_t>(v) * mask.width + u;
            if (depth[i] == 0) continue;
            ClassId cls = mask.classes[i];
            auto [it, inserted] = clouds.try_emplace(cls);
            if (inserted) it->second.cls = cls;
            it->second.points.push_back(project_pixel(u, v, depth[i], k));
        }
    }
    return clouds;
}

}  // namespace e5sh::occmap
