#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "e5sh/occmap/geometry.hpp"

namespace e5sh::occmap {

enum class VoxelState { Unknown, Free, Occupied };

inline double occupancy_probability(double log_odds) { return 1.0 / (1.0 + std::exp(-log_odds)); }

struct OctreeParams {
    double resolution = 0.05;  // meters per voxel
    int depth = 16;            // root cube side = resolution * 2^depth
    double l_hit = 0.85;       // log odds(0.7)
    double l_miss = -0.4;      // log odds(0.4)
    double l_min = -2.0;
    double l_max = 3.5;
    double occupied_above = 0.5;  // probability threshold
};

// Probabilistic log-odds occupancy map over a cubic region centered on the
// origin. Leaves are stored sparsely and uncompressed (no pruning), keyed by
// the voxel's integer grid index; untouched voxels are Unknown.
class OctreeMap {
  public:
    explicit OctreeMap(OctreeParams params = {});

    const OctreeParams& params() const { return params_; }

    // Voxel key for a metric point; empty when outside the root cube.
    std::optional<uint64_t> key_of(const Point3& p) const;
    Point3 voxel_center(uint64_t key) const;

    // One sensor scan: every endpoint voxel gets one l_hit, every other voxel
    // traversed by a ray gets at most one l_miss (a hit beats a miss within
    // the same call). Points outside the root cube are skipped and counted.
    // The sensor origin must lie inside the root cube.
    void insert_cloud(const Point3& origin, const std::vector<Point3>& points);

    VoxelState query(const Point3& p) const;
    std::optional<double> log_odds_at(const Point3& p) const;

    // Voxels crossed by the segment origin->end: origin's voxel included,
    // endpoint's voxel excluded (3D integer grid traversal).
    std::vector<uint64_t> ray_keys(const Point3& origin, const Point3& end) const;

    size_t leaf_count() const { return leaves_.size(); }
    uint64_t skipped_points() const { return skipped_points_; }
    const std::unordered_map<uint64_t, double>& leaves() const { return leaves_; }

    // One line per leaf: "x y z log_odds", voxel centers, six decimal places,
    // lines sorted lexicographically. Stable across runs for golden tests.
    std::string export_text() const;

  private:
    void apply(uint64_t key, double delta);

    OctreeParams params_;
    double half_side_;  // root cube spans [-half_side, +half_side) per axis
    int64_t key_offset_;
    std::unordered_map<uint64_t, double> leaves_;
    uint64_t skipped_points_ = 0;
};

}  // namespace e5sh::occmap
