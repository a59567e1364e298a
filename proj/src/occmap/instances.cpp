#include "e5sh/occmap/instances.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "e5sh/occmap/geometry.hpp"

namespace e5sh::occmap {

namespace {

// Two-pass union-find labeling over the strawberry pixels.
class DisjointSet {
  public:
    explicit DisjointSet(size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

    uint32_t find(uint32_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    void unite(uint32_t a, uint32_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent_[std::max(a, b)] = std::min(a, b);
    }

  private:
    std::vector<uint32_t> parent_;
};

}  // namespace

std::vector<StrawberryInstance> extract_instances(const LabeledMask& mask, size_t min_area) {
    mask.validate();
    const size_t n = mask.pixel_count();
    const int w = mask.width;
    const int h = mask.height;
    auto berry = [&](size_t i) { return mask.classes[i] == ClassId::Strawberry; };

    DisjointSet ds(n);
    for (int v = 0; v < h; ++v) {
        for (int u = 0; u < w; ++u) {
            size_t i = static_cast<size_t>(v) * w + u;
            if (!berry(i)) continue;
            // Union with the already-scanned half of the 8-neighborhood.
            const int du[4] = {-1, -1, 0, 1};
            const int dv[4] = {0, -1, -1, -1};
            for (int k = 0; k < 4; ++k) {
                int uu = u + du[k], vv = v + dv[k];
                if (uu < 0 || uu >= w || vv < 0) continue;
                size_t j = static_cast<size_t>(vv) * w + uu;
                if (berry(j)) ds.unite(static_cast<uint32_t>(i), static_cast<uint32_t>(j));
            }
        }
    }

    // Collect components in scan order of their roots.
    std::vector<StrawberryInstance> out;
    std::vector<int32_t> component_of_root(n, -1);
    for (size_t i = 0; i < n; ++i) {
        if (!berry(i)) continue;
        uint32_t root = ds.find(static_cast<uint32_t>(i));
        int32_t& slot = component_of_root[root];
        if (slot < 0) {
            slot = static_cast<int32_t>(out.size());
            out.emplace_back();
        }
        out[static_cast<size_t>(slot)].pixels.push_back(static_cast<uint32_t>(i));
    }

    std::erase_if(out, [min_area](const StrawberryInstance& s) { return s.area() < min_area; });

    double center_u = (w - 1) / 2.0;
    double center_v = (h - 1) / 2.0;
    size_t target_idx = 0;
    double best_d2 = 0;
    for (size_t c = 0; c < out.size(); ++c) {
        StrawberryInstance& s = out[c];
        s.instance_id = static_cast<uint32_t>(c);
        double su = 0, sv = 0;
        for (uint32_t px : s.pixels) {
            su += px % w;
            sv += px / w;
        }
        s.centroid_u = su / static_cast<double>(s.area());
        s.centroid_v = sv / static_cast<double>(s.area());
        double d2 = (s.centroid_u - center_u) * (s.centroid_u - center_u) +
                    (s.centroid_v - center_v) * (s.centroid_v - center_v);
        bool better = c == 0 || d2 < best_d2 ||
                      (d2 == best_d2 && s.area() > out[target_idx].area());
        if (better) {
            best_d2 = d2;
            target_idx = c;  // equal distance and area keeps the lower id
        }
    }
    if (!out.empty()) out[target_idx].is_target = true;
    return out;
}

PlanningMaps build_planning_maps(const LabeledMask& mask, const std::vector<uint16_t>& depth,
                                 const CameraIntrinsics& intrinsics,
                                 const std::optional<StrawberryInstance>& target,
                                 OctreeParams params) {
    auto clouds = project_depth(mask, depth, intrinsics);
    PlanningMaps maps(params);
    const Point3 origin{0, 0, 0};

    // Rigid structure and canopy belong to the same scan: one insertion, so
    // a hit from either class beats a miss from the other.
    std::vector<Point3> obstacle_points;
    std::unordered_set<uint64_t> rigid_keys;
    if (auto it = clouds.find(ClassId::RigidObstacle); it != clouds.end()) {
        obstacle_points = it->second.points;
        for (const Point3& p : it->second.points)
            if (auto k = maps.obstacles.key_of(p)) rigid_keys.insert(*k);
    }
    if (auto it = clouds.find(ClassId::Canopy); it != clouds.end()) {
        obstacle_points.insert(obstacle_points.end(), it->second.points.begin(),
                               it->second.points.end());
        for (const Point3& p : it->second.points)
            if (auto k = maps.obstacles.key_of(p))
                if (!rigid_keys.count(*k)) maps.soft_voxels.insert(*k);
    }
    if (!obstacle_points.empty()) maps.obstacles.insert_cloud(origin, obstacle_points);

    if (target) {
        std::vector<Point3> points;
        points.reserve(target->pixels.size());
        for (uint32_t px : target->pixels) {
            if (depth[px] == 0) continue;
            uint16_t u = static_cast<uint16_t>(px % mask.width);
            uint16_t v = static_cast<uint16_t>(px / mask.width);
            points.push_back(project_pixel(u, v, depth[px], intrinsics));
        }
        maps.strawberries.insert_cloud(origin, points);
    }
    return maps;
}

}  // namespace e5sh::occmap
