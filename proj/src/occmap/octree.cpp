#include "e5sh/occmap/octree.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <unordered_set>

namespace e5sh::occmap {

namespace {

constexpr uint64_t kAxisMask = 0xFFFF;

uint64_t pack_key(int64_t kx, int64_t ky, int64_t kz) {
    return (static_cast<uint64_t>(kx) << 32) | (static_cast<uint64_t>(ky) << 16) |
           static_cast<uint64_t>(kz);
}

}  // namespace

OctreeMap::OctreeMap(OctreeParams params) : params_(params) {
    if (params_.resolution <= 0) throw std::invalid_argument("octree: resolution must be positive");
    if (params_.depth < 1 || params_.depth > 16)
        throw std::invalid_argument("octree: depth must be in [1, 16]");
    if (params_.l_min > params_.l_max) throw std::invalid_argument("octree: empty clamp interval");
    int64_t side = int64_t{1} << params_.depth;
    key_offset_ = side / 2;
    half_side_ = params_.resolution * static_cast<double>(key_offset_);
}

std::optional<uint64_t> OctreeMap::key_of(const Point3& p) const {
    int64_t side = int64_t{1} << params_.depth;
    int64_t k[3];
    for (int a = 0; a < 3; ++a) {
        if (!std::isfinite(p[a])) return std::nullopt;
        int64_t idx = static_cast<int64_t>(std::floor(p[a] / params_.resolution)) + key_offset_;
        if (idx < 0 || idx >= side) return std::nullopt;
        k[a] = idx;
    }
    return pack_key(k[0], k[1], k[2]);
}

Point3 OctreeMap::voxel_center(uint64_t key) const {
    int64_t kx = static_cast<int64_t>((key >> 32) & kAxisMask);
    int64_t ky = static_cast<int64_t>((key >> 16) & kAxisMask);
    int64_t kz = static_cast<int64_t>(key & kAxisMask);
    auto center = [this](int64_t idx) {
        return (static_cast<double>(idx - key_offset_) + 0.5) * params_.resolution;
    };
    return {center(kx), center(ky), center(kz)};
}

std::vector<uint64_t> OctreeMap::ray_keys(const Point3& origin, const Point3& end) const {
    auto start_key = key_of(origin);
    auto end_key = key_of(end);
    if (!start_key || !end_key)
        throw std::invalid_argument("octree: ray endpoints must lie inside the root cube");
    if (*start_key == *end_key) return {};

    const double res = params_.resolution;
    int64_t idx[3], end_idx[3], step[3];
    double t_max[3], t_delta[3];
    for (int a = 0; a < 3; ++a) {
        idx[a] = static_cast<int64_t>(std::floor(origin[a] / res));
        end_idx[a] = static_cast<int64_t>(std::floor(end[a] / res));
        double d = end[a] - origin[a];
        if (d > 0) {
            step[a] = 1;
            t_max[a] = ((static_cast<double>(idx[a]) + 1.0) * res - origin[a]) / d;
            t_delta[a] = res / d;
        } else if (d < 0) {
            step[a] = -1;
            t_max[a] = (static_cast<double>(idx[a]) * res - origin[a]) / d;
            t_delta[a] = -res / d;
        } else {
            step[a] = 0;
            t_max[a] = std::numeric_limits<double>::infinity();
            t_delta[a] = std::numeric_limits<double>::infinity();
        }
    }

    std::vector<uint64_t> out;
    out.push_back(*start_key);
    // The traversal must reach the endpoint voxel in at most the Manhattan
    // distance between the two grid cells.
    int64_t budget = 3;
    for (int a = 0; a < 3; ++a) budget += std::llabs(end_idx[a] - idx[a]);
    while (budget-- > 0) {
        int axis = 0;
        if (t_max[1] < t_max[axis]) axis = 1;
        if (t_max[2] < t_max[axis]) axis = 2;
        if (idx[axis] == end_idx[axis]) {
            // The segment ends inside this axis' terminal slab. An endpoint
            // sitting exactly on a voxel boundary makes the crossing out of
            // that slab compute at t ~= 1, tying with the other axes'
            // arrival crossings; stepping would overshoot the endpoint
            // voxel, which a +-1 walk can never revisit.
            t_max[axis] = std::numeric_limits<double>::infinity();
            continue;
        }
        idx[axis] += step[axis];
        t_max[axis] += t_delta[axis];
        if (idx[0] == end_idx[0] && idx[1] == end_idx[1] && idx[2] == end_idx[2]) return out;
        out.push_back(pack_key(idx[0] + key_offset_, idx[1] + key_offset_, idx[2] + key_offset_));
    }
    throw std::logic_error("octree: grid traversal failed to reach the endpoint voxel");
}

void OctreeMap::apply(uint64_t key, double delta) {
    double& L = leaves_[key];  // default-initialized to 0 (p = 0.5) on first touch
    L = std::clamp(L + delta, params_.l_min, params_.l_max);
}

void OctreeMap::insert_cloud(const Point3& origin, const std::vector<Point3>& points) {
    if (!key_of(origin))
        throw std::invalid_argument("octree: sensor origin must lie inside the root cube");

    std::unordered_set<uint64_t> hits;
    std::unordered_set<uint64_t> misses;
    for (const Point3& p : points) {
        auto end_key = key_of(p);
        if (!end_key) {
            ++skipped_points_;
            continue;
        }
        hits.insert(*end_key);
        for (uint64_t k : ray_keys(origin, p)) misses.insert(k);
    }
    for (uint64_t k : hits) {
        misses.erase(k);  // a hit beats a miss within one insertion
        apply(k, params_.l_hit);
    }
    for (uint64_t k : misses) apply(k, params_.l_miss);
}

VoxelState OctreeMap::query(const Point3& p) const {
    auto L = log_odds_at(p);
    if (!L) return VoxelState::Unknown;
    return occupancy_probability(*L) > params_.occupied_above ? VoxelState::Occupied : VoxelState::Free;
}

std::optional<double> OctreeMap::log_odds_at(const Point3& p) const {
    auto key = key_of(p);
    if (!key) return std::nullopt;
    auto it = leaves_.find(*key);
    if (it == leaves_.end()) return std::nullopt;
    return it->second;
}

std::string OctreeMap::export_text() const {
    std::vector<std::string> lines;
    lines.reserve(leaves_.size());
    char buf[128];
    for (const auto& [key, L] : leaves_) {
        Point3 c = voxel_center(key);
        std::snprintf(buf, sizeof buf, "%.6f %.6f %.6f %.6f", c[0], c[1], c[2], L);
        lines.emplace_back(buf);
    }
    std::sort(lines.begin(), lines.end());
    std::string out;
    for (const auto& line : lines) {
        out += line;
        out += '\n';
    }
    return out;
}

}  // namespace e5sh::occmap
