#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "e5sh/harness/scenegen.hpp"
#include "e5sh/types.hpp"

namespace e5sh::harness {

// An on-disk dataset loaded into memory. Scene i lives in the files
// 000000.rgb / .depth / .mask (zero-padded index), with shared
// intrinsics.json and a dataset.json manifest carrying the count.
struct Dataset {
    CameraIntrinsics intrinsics;
    std::vector<Scene> scenes;

    size_t count() const { return scenes.size(); }
};

// Summary the generator reports: dataset-level mean class fractions.
struct DatasetSummary {
    size_t count = 0;
    std::array<double, kNumClasses> mean_fractions{};
};

// Generates `count` scenes and writes them under out_dir (created if
// missing). Same (spec, count, seed) produce byte-identical directories.
DatasetSummary gen_dataset(const SceneSpec& spec, size_t count, uint64_t seed,
                           const std::string& out_dir);

// Writes one already-generated dataset (used by gen_dataset; exposed for
// hand-built fixtures).
void save_dataset(const Dataset& ds, const std::string& out_dir);

// Loads a dataset directory; throws std::runtime_error on missing or
// malformed files.
Dataset load_dataset(const std::string& dir);

}  // namespace e5sh::harness
