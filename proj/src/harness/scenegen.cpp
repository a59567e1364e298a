#include "e5sh/harness/scenegen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "e5sh/perception/backend.hpp"
#include "e5sh/sim/draw.hpp"
#include "e5sh/sim/rng.hpp"

namespace e5sh::harness {

void SceneSpec::validate() const {
    if (width == 0 || height == 0) throw std::invalid_argument("scene spec: empty image");
    if (target_strawberry < 0 || target_canopy < 0 || target_rigid < 0)
        throw std::invalid_argument("scene spec: negative abundance target");
    if (target_strawberry + target_canopy + target_rigid >= 1.0)
        throw std::invalid_argument("scene spec: abundance targets leave no background");
    if (tol_strawberry <= 0 || tol_canopy <= 0 || tol_rigid <= 0)
        throw std::invalid_argument("scene spec: tolerance bands must be positive");
    if (strawberry_radius_min <= 0 || strawberry_radius_min > strawberry_radius_max ||
        canopy_radius_min <= 0 || canopy_radius_min > canopy_radius_max ||
        rigid_side_min <= 0 || rigid_side_min > rigid_side_max)
        throw std::invalid_argument("scene spec: bad size range");
    if (!(strawberry_depth_min < strawberry_depth_max &&
          strawberry_depth_max <= canopy_depth_min && canopy_depth_min < canopy_depth_max &&
          canopy_depth_max <= rigid_depth_min && rigid_depth_min < rigid_depth_max &&
          rigid_depth_max <= background_depth))
        throw std::invalid_argument("scene spec: depth bands must be ordered and disjoint");
    if (noise_sigma < 0) throw std::invalid_argument("scene spec: negative noise");
    if (max_rounds < 1) throw std::invalid_argument("scene spec: need at least one round");
}

CameraIntrinsics scene_intrinsics(uint16_t width, uint16_t height) {
    CameraIntrinsics k;
    k.width = width;
    k.height = height;
    k.fx = 430.0 * width / 848.0;
    k.fy = k.fx;
    k.cx = width / 2.0;
    k.cy = height / 2.0;
    k.validate();
    return k;
}

std::array<double, kNumClasses> class_fractions(const LabeledMask& mask) {
    mask.validate();
    std::array<double, kNumClasses> out{};
    if (mask.classes.empty()) return out;
    for (ClassId c : mask.classes) out[static_cast<size_t>(c)] += 1.0;
    for (double& f : out) f /= static_cast<double>(mask.classes.size());
    return out;
}

namespace {

using sim::bounded;
using sim::normal01;
using sim::u01;
using sim::uniform_range;

struct Canvas {
    int w = 0;
    int h = 0;
    std::vector<double> depth_m;   // current nearest surface per pixel
    std::vector<ClassId> cls;      // its class
    std::vector<uint32_t> shape;   // its shape id (shade lookup)
    std::array<size_t, kNumClasses> owned{};

    Canvas(int width, int height, double background_depth)
        : w(width), h(height), depth_m(static_cast<size_t>(width) * height, background_depth),
          cls(static_cast<size_t>(width) * height, ClassId::Background),
          shape(static_cast<size_t>(width) * height, 0) {
        owned[static_cast<size_t>(ClassId::Background)] = depth_m.size();
    }

    void claim(size_t idx, double z, ClassId c, uint32_t shape_id) {
        if (z >= depth_m[idx]) return;
        --owned[static_cast<size_t>(cls[idx])];
        ++owned[static_cast<size_t>(c)];
        depth_m[idx] = z;
        cls[idx] = c;
        shape[idx] = shape_id;
    }

    double fraction(ClassId c) const {
        return static_cast<double>(owned[static_cast<size_t>(c)]) / depth_m.size();
    }
};

// Per-shape shade: the class palette color nudged by a per-shape offset so
// instances are distinguishable while staying nearest to their own palette
// entry for the color-based segmenter.
std::array<uint8_t, 3> make_shade(ClassId c, std::mt19937_64& rng) {
    std::array<uint8_t, 3> shade{};
    const auto& base = perception::kClassPalette[static_cast<size_t>(c)];
    for (int ch = 0; ch < 3; ++ch) {
        double v = base[ch] + uniform_range(rng, -15.0, 15.0);
        shade[ch] = static_cast<uint8_t>(std::clamp(v, 0.0, 255.0));
    }
    return shade;
}

void paint_ellipse(Canvas& cv, double cx, double cy, double rx, double ry, double z, ClassId c,
                   uint32_t shape_id) {
    int u0 = std::max(0, static_cast<int>(std::floor(cx - rx)));
    int u1 = std::min(cv.w - 1, static_cast<int>(std::ceil(cx + rx)));
    int v0 = std::max(0, static_cast<int>(std::floor(cy - ry)));
    int v1 = std::min(cv.h - 1, static_cast<int>(std::ceil(cy + ry)));
    for (int v = v0; v <= v1; ++v)
        for (int u = u0; u <= u1; ++u) {
            double du = (u - cx) / rx;
            double dv = (v - cy) / ry;
            if (du * du + dv * dv <= 1.0)
                cv.claim(static_cast<size_t>(v) * cv.w + u, z, c, shape_id);
        }
}

void paint_rect(Canvas& cv, int x, int y, int w, int h, double z, ClassId c, uint32_t shape_id) {
    int u1 = std::min(cv.w, x + w);
    int v1 = std::min(cv.h, y + h);
    for (int v = std::max(0, y); v < v1; ++v)
        for (int u = std::max(0, x); u < u1; ++u)
            cv.claim(static_cast<size_t>(v) * cv.w + u, z, c, shape_id);
}

struct ShapeBook {
    std::vector<std::array<uint8_t, 3>> shades;

    uint32_t add(ClassId c, std::mt19937_64& rng) {
        shades.push_back(make_shade(c, rng));
        return static_cast<uint32_t>(shades.size() - 1);
    }
};

// Adds shapes of one class until its visible fraction enters the target
// band. The sampled size shrinks once the remaining deficit is smaller than
// a full-size shape, which keeps the loop from overshooting past the band.
bool fill_class(Canvas& cv, ShapeBook& book, std::mt19937_64& rng, const SceneSpec& spec,
                ClassId c) {
    double target, tol, size_min, size_max, depth_min, depth_max;
    switch (c) {
        case ClassId::Strawberry:
            target = spec.target_strawberry;
            tol = spec.tol_strawberry;
            size_min = spec.strawberry_radius_min;
            size_max = spec.strawberry_radius_max;
            depth_min = spec.strawberry_depth_min;
            depth_max = spec.strawberry_depth_max;
            break;
        case ClassId::Canopy:
            target = spec.target_canopy;
            tol = spec.tol_canopy;
            size_min = spec.canopy_radius_min;
            size_max = spec.canopy_radius_max;
            depth_min = spec.canopy_depth_min;
            depth_max = spec.canopy_depth_max;
            break;
        default:
            target = spec.target_rigid;
            tol = spec.tol_rigid;
            size_min = spec.rigid_side_min;
            size_max = spec.rigid_side_max;
            depth_min = spec.rigid_depth_min;
            depth_max = spec.rigid_depth_max;
            break;
    }

    const double total = static_cast<double>(cv.depth_m.size());
    // A spiked shape budget: plenty for legitimate specs, finite for
    // unsatisfiable ones.
    for (int added = 0; added < 4000; ++added) {
        double frac = cv.fraction(c);
        if (frac >= target - tol * 0.5) break;
        double deficit_px = (target - frac) * total;
        double z = uniform_range(rng, depth_min, depth_max);
        uint32_t id = book.add(c, rng);
        if (c == ClassId::RigidObstacle) {
            // Posts, beams, and panels: one long axis, one short.
            double long_side = uniform_range(rng, size_min, size_max) * cv.w;
            double short_side = uniform_range(rng, size_min, size_min * 2.5) * cv.w;
            // Trim the footprint once the deficit is nearly closed.
            double cap = std::max(4.0, deficit_px / std::max(1.0, short_side));
            long_side = std::min(long_side, cap);
            int w, h;
            if (bounded(rng, 2) == 0) {
                w = std::max(2, static_cast<int>(short_side));
                h = std::max(2, static_cast<int>(long_side));
            } else {
                w = std::max(2, static_cast<int>(long_side));
                h = std::max(2, static_cast<int>(short_side));
            }
            int x = static_cast<int>(bounded(rng, static_cast<uint64_t>(cv.w)));
            int y = static_cast<int>(bounded(rng, static_cast<uint64_t>(cv.h)));
            paint_rect(cv, x - w / 2, y - h / 2, w, h, z, c, id);
        } else {
            double r = uniform_range(rng, size_min, size_max) * cv.w;
            // Never aim for more area than the remaining deficit.
            double r_cap = std::sqrt(deficit_px / std::numbers::pi / 1.1);
            r = std::max(1.5, std::min(r, r_cap));
            r = std::min(r, cv.w / 2.0 - 1.0);
            double ry = r * uniform_range(rng, 0.85, 1.25);
            ry = std::min(ry, cv.h / 2.0 - 1.0);
            double cx = uniform_range(rng, r, cv.w - r);
            double cy = uniform_range(rng, ry, cv.h - ry);
            if (c == ClassId::Canopy) {
                // A canopy blob is a clump of overlapping ellipses.
                int lobes = 2 + static_cast<int>(bounded(rng, 3));
                for (int l = 0; l < lobes; ++l) {
                    double ox = uniform_range(rng, -0.6, 0.6) * r;
                    double oy = uniform_range(rng, -0.6, 0.6) * ry;
                    paint_ellipse(cv, cx + ox, cy + oy, r * uniform_range(rng, 0.5, 0.9),
                                  ry * uniform_range(rng, 0.5, 0.9), z, c, id);
                }
            } else {
                paint_ellipse(cv, cx, cy, r, ry, z, c, id);
            }
        }
    }
    double frac = cv.fraction(c);
    return frac >= target - tol && frac <= target + tol;
}

}  // namespace

Scene generate_scene(const SceneSpec& spec, uint64_t seed, uint64_t scene_index) {
    spec.validate();
    auto rng = sim::make_rng(seed, "scene", scene_index);
    const int w = spec.width;
    const int h = spec.height;

    for (int round = 0; round < spec.max_rounds; ++round) {
        Canvas cv(w, h, spec.background_depth);
        ShapeBook book;
        // Shape id 0 is the scene's background shade.
        book.add(ClassId::Background, rng);

        // Nearest class first: deeper classes can never disturb a class
        // that has already settled, so each fraction is final when filled.
        bool ok = fill_class(cv, book, rng, spec, ClassId::Strawberry) &&
                  fill_class(cv, book, rng, spec, ClassId::Canopy) &&
                  fill_class(cv, book, rng, spec, ClassId::RigidObstacle);
        if (!ok) continue;

        Scene scene;
        scene.truth.width = spec.width;
        scene.truth.height = spec.height;
        scene.truth.classes = cv.cls;
        scene.truth.confidence.assign(cv.cls.size(), 255);

        Frame& f = scene.frame;
        f.frame_id = scene_index;
        f.capture_ts_ns = 0;
        f.width = spec.width;
        f.height = spec.height;
        f.intrinsics = scene_intrinsics(spec.width, spec.height);
        f.depth.resize(cv.depth_m.size());
        for (size_t i = 0; i < cv.depth_m.size(); ++i) {
            double mm = std::round(cv.depth_m[i] * 1000.0);
            f.depth[i] = static_cast<uint16_t>(std::clamp(mm, 0.0, 65535.0));
        }

        f.rgb.resize(cv.cls.size() * 3);
        for (int v = 0; v < h; ++v)
            for (int u = 0; u < w; ++u) {
                size_t idx = static_cast<size_t>(v) * w + u;
                const auto& own = book.shades[cv.shape[idx]];
                double px[3] = {double(own[0]), double(own[1]), double(own[2])};

                // Class boundaries get a blended rim: the true owner keeps
                // the mask label while the color smears toward the
                // neighbor, the way real edges defeat color classifiers.
                const int du[4] = {1, -1, 0, 0};
                const int dv[4] = {0, 0, 1, -1};
                for (int k = 0; k < 4; ++k) {
                    int nu = u + du[k];
                    int nv = v + dv[k];
                    if (nu < 0 || nu >= w || nv < 0 || nv >= h) continue;
                    size_t nidx = static_cast<size_t>(nv) * w + nu;
                    if (cv.cls[nidx] == cv.cls[idx]) continue;
                    double alpha = uniform_range(rng, 0.2, 0.8);
                    const auto& other = book.shades[cv.shape[nidx]];
                    for (int ch = 0; ch < 3; ++ch)
                        px[ch] = alpha * px[ch] + (1.0 - alpha) * other[ch];
                    break;
                }
                for (int ch = 0; ch < 3; ++ch) {
                    double v8 = px[ch] + spec.noise_sigma * normal01(rng);
                    f.rgb[idx * 3 + ch] = static_cast<uint8_t>(std::clamp(v8, 0.0, 255.0));
                }
            }

        f.validate();
        scene.truth.validate();
        return scene;
    }
    throw std::runtime_error("scene generation: abundance targets unreachable after " +
                             std::to_string(spec.max_rounds) + " rounds");
}

}  // namespace e5sh::harness
