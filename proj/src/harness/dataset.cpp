#include "e5sh/harness/dataset.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace e5sh::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string scene_stem(size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%06zu", index);
    return buf;
}

void write_file(const fs::path& path, const void* data, size_t bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("dataset: cannot write " + path.string());
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
    if (!out) throw std::runtime_error("dataset: short write to " + path.string());
}

std::vector<uint8_t> read_file(const fs::path& path, size_t expected_bytes) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("dataset: cannot read " + path.string());
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
    if (bytes.size() != expected_bytes)
        throw std::runtime_error("dataset: " + path.string() + " holds " +
                                 std::to_string(bytes.size()) + " bytes, expected " +
                                 std::to_string(expected_bytes));
    return bytes;
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("dataset: cannot read " + path.string());
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

void save_dataset(const Dataset& ds, const std::string& out_dir) {
    ds.intrinsics.validate();
    fs::path dir(out_dir);
    fs::create_directories(dir);

    json intr;
    intr["fx"] = ds.intrinsics.fx;
    intr["fy"] = ds.intrinsics.fy;
    intr["cx"] = ds.intrinsics.cx;
    intr["cy"] = ds.intrinsics.cy;
    intr["width"] = ds.intrinsics.width;
    intr["height"] = ds.intrinsics.height;
    std::string intr_text = intr.dump(2) + "\n";
    write_file(dir / "intrinsics.json", intr_text.data(), intr_text.size());

    json manifest;
    manifest["count"] = ds.scenes.size();
    std::string manifest_text = manifest.dump(2) + "\n";
    write_file(dir / "dataset.json", manifest_text.data(), manifest_text.size());

    for (size_t i = 0; i < ds.scenes.size(); ++i) {
        const Scene& s = ds.scenes[i];
        s.frame.validate();
        s.truth.validate();
        if (s.frame.width != ds.intrinsics.width || s.frame.height != ds.intrinsics.height)
            throw std::invalid_argument("dataset: scene size differs from intrinsics");
        std::string stem = scene_stem(i);
        write_file(dir / (stem + ".rgb"), s.frame.rgb.data(), s.frame.rgb.size());

        // Depth serializes little-endian u16 regardless of host order.
        std::vector<uint8_t> depth_bytes(s.frame.depth.size() * 2);
        for (size_t p = 0; p < s.frame.depth.size(); ++p) {
            depth_bytes[2 * p] = static_cast<uint8_t>(s.frame.depth[p] & 0xFF);
            depth_bytes[2 * p + 1] = static_cast<uint8_t>(s.frame.depth[p] >> 8);
        }
        write_file(dir / (stem + ".depth"), depth_bytes.data(), depth_bytes.size());

        std::vector<uint8_t> mask_bytes(s.truth.classes.size());
        for (size_t p = 0; p < mask_bytes.size(); ++p)
            mask_bytes[p] = static_cast<uint8_t>(s.truth.classes[p]);
        write_file(dir / (stem + ".mask"), mask_bytes.data(), mask_bytes.size());
    }
}

DatasetSummary gen_dataset(const SceneSpec& spec, size_t count, uint64_t seed,
                           const std::string& out_dir) {
    spec.validate();
    Dataset ds;
    ds.intrinsics = scene_intrinsics(spec.width, spec.height);
    ds.scenes.reserve(count);
    DatasetSummary summary;
    summary.count = count;
    for (size_t i = 0; i < count; ++i) {
        ds.scenes.push_back(generate_scene(spec, seed, i));
        auto f = class_fractions(ds.scenes.back().truth);
        for (size_t k = 0; k < kNumClasses; ++k) summary.mean_fractions[k] += f[k];
    }
    if (count > 0)
        for (double& f : summary.mean_fractions) f /= static_cast<double>(count);
    save_dataset(ds, out_dir);
    return summary;
}

Dataset load_dataset(const std::string& dir_in) {
    fs::path dir(dir_in);
    json intr, manifest;
    try {
        intr = json::parse(read_text(dir / "intrinsics.json"));
        manifest = json::parse(read_text(dir / "dataset.json"));
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("dataset: bad JSON: ") + e.what());
    }

    Dataset ds;
    try {
        ds.intrinsics.fx = intr.at("fx").get<double>();
        ds.intrinsics.fy = intr.at("fy").get<double>();
        ds.intrinsics.cx = intr.at("cx").get<double>();
        ds.intrinsics.cy = intr.at("cy").get<double>();
        ds.intrinsics.width = intr.at("width").get<uint16_t>();
        ds.intrinsics.height = intr.at("height").get<uint16_t>();
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("dataset: bad intrinsics: ") + e.what());
    }
    ds.intrinsics.validate();

    size_t count = manifest.value("count", size_t{0});
    size_t pixels = static_cast<size_t>(ds.intrinsics.width) * ds.intrinsics.height;
    ds.scenes.reserve(count);
    for (size_t i = 0; i < count; ++i) {
        std::string stem = scene_stem(i);
        Scene s;
        Frame& f = s.frame;
        f.frame_id = i;
        f.width = ds.intrinsics.width;
        f.height = ds.intrinsics.height;
        f.intrinsics = ds.intrinsics;
        f.rgb = read_file(dir / (stem + ".rgb"), pixels * 3);

        auto depth_bytes = read_file(dir / (stem + ".depth"), pixels * 2);
        f.depth.resize(pixels);
        for (size_t p = 0; p < pixels; ++p)
            f.depth[p] = static_cast<uint16_t>(depth_bytes[2 * p] |
                                               (uint16_t(depth_bytes[2 * p + 1]) << 8));

        auto mask_bytes = read_file(dir / (stem + ".mask"), pixels);
        s.truth.width = f.width;
        s.truth.height = f.height;
        s.truth.classes.resize(pixels);
        for (size_t p = 0; p < pixels; ++p) {
            if (mask_bytes[p] >= kNumClasses)
                throw std::runtime_error("dataset: invalid class id in " + stem + ".mask");
            s.truth.classes[p] = static_cast<ClassId>(mask_bytes[p]);
        }
        s.truth.confidence.assign(pixels, 255);
        f.validate();
        ds.scenes.push_back(std::move(s));
    }
    return ds;
}

}  // namespace e5sh::harness
