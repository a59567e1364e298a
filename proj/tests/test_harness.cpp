#include <unistd.h>

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "e5sh/codec.hpp"
#include "e5sh/harness/dataset.hpp"
#include "e5sh/harness/experiment.hpp"
#include "e5sh/harness/scenegen.hpp"
#include "e5sh/perception/action.hpp"
#include "e5sh/perception/backend.hpp"
#include "e5sh/sim/scheduler.hpp"

using namespace e5sh;
using namespace e5sh::harness;

namespace fs = std::filesystem;

namespace {

SceneSpec small_spec() {
    SceneSpec s;
    s.width = 160;
    s.height = 96;
    return s;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("e5sh_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string str() const { return path.string(); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool same_dir_bytes(const fs::path& a, const fs::path& b) {
    std::set<std::string> names_a, names_b;
    for (const auto& e : fs::directory_iterator(a)) names_a.insert(e.path().filename().string());
    for (const auto& e : fs::directory_iterator(b)) names_b.insert(e.path().filename().string());
    if (names_a != names_b) return false;
    for (const auto& name : names_a)
        if (slurp(a / name) != slurp(b / name)) return false;
    return true;
}

}  // namespace

// ---------------------------------------------------------------------------
// Scene generation

TEST_CASE("generated scenes are pixel-identical across calls") {
    SceneSpec spec = small_spec();
    Scene a = generate_scene(spec, 77, 3);
    Scene b = generate_scene(spec, 77, 3);
    CHECK(a.frame.rgb == b.frame.rgb);
    CHECK(a.frame.depth == b.frame.depth);
    CHECK(a.truth == b.truth);
}

TEST_CASE("different seeds or indices give different scenes") {
    SceneSpec spec = small_spec();
    Scene a = generate_scene(spec, 77, 3);
    Scene b = generate_scene(spec, 78, 3);
    Scene c = generate_scene(spec, 77, 4);
    CHECK(a.frame.rgb != b.frame.rgb);
    CHECK(a.frame.rgb != c.frame.rgb);
}

TEST_CASE("every scene honors its per-class abundance band") {
    SceneSpec spec = small_spec();
    for (uint64_t i = 0; i < 8; ++i) {
        Scene s = generate_scene(spec, 1234, i);
        auto f = class_fractions(s.truth);
        CHECK(f[0] >= spec.target_strawberry - spec.tol_strawberry);
        CHECK(f[0] <= spec.target_strawberry + spec.tol_strawberry);
        CHECK(f[1] >= spec.target_canopy - spec.tol_canopy);
        CHECK(f[1] <= spec.target_canopy + spec.tol_canopy);
        CHECK(f[2] >= spec.target_rigid - spec.tol_rigid);
        CHECK(f[2] <= spec.target_rigid + spec.tol_rigid);
        CHECK(f[3] > 0.2);  // background takes the remainder
    }
}

TEST_CASE("abundance bands hold at full camera resolution") {
    SceneSpec spec;  // defaults: 848x480
    Scene s = generate_scene(spec, 9, 0);
    auto f = class_fractions(s.truth);
    CHECK(f[0] >= spec.target_strawberry - spec.tol_strawberry);
    CHECK(f[0] <= spec.target_strawberry + spec.tol_strawberry);
    CHECK(f[1] >= spec.target_canopy - spec.tol_canopy);
    CHECK(f[1] <= spec.target_canopy + spec.tol_canopy);
    CHECK(f[2] >= spec.target_rigid - spec.tol_rigid);
    CHECK(f[2] <= spec.target_rigid + spec.tol_rigid);
}

TEST_CASE("class_fractions counts a hand-built mask") {
    LabeledMask m = LabeledMask::filled(4, 2, ClassId::Background);
    m.classes[0] = ClassId::Strawberry;
    m.classes[1] = ClassId::Canopy;
    m.classes[2] = ClassId::Canopy;
    m.classes[3] = ClassId::RigidObstacle;
    auto f = class_fractions(m);
    CHECK(f[0] == doctest::Approx(1.0 / 8));
    CHECK(f[1] == doctest::Approx(2.0 / 8));
    CHECK(f[2] == doctest::Approx(1.0 / 8));
    CHECK(f[3] == doctest::Approx(4.0 / 8));
}

TEST_CASE("depth values sit inside their class band") {
    SceneSpec spec = small_spec();
    Scene s = generate_scene(spec, 5, 0);
    auto band = [&](ClassId c) -> std::pair<double, double> {
        switch (c) {
            case ClassId::Strawberry: return {spec.strawberry_depth_min, spec.strawberry_depth_max};
            case ClassId::Canopy: return {spec.canopy_depth_min, spec.canopy_depth_max};
            case ClassId::RigidObstacle: return {spec.rigid_depth_min, spec.rigid_depth_max};
            case ClassId::Background: return {spec.background_depth, spec.background_depth};
        }
        return {0, 0};
    };
    for (size_t i = 0; i < s.truth.classes.size(); ++i) {
        auto [lo, hi] = band(s.truth.classes[i]);
        CHECK(s.frame.depth[i] >= static_cast<uint16_t>(lo * 1000) - 2);
        CHECK(s.frame.depth[i] <= static_cast<uint16_t>(hi * 1000) + 2);
    }
}

TEST_CASE("scene rgb carries sensor noise, not flat palette colors") {
    Scene s = generate_scene(small_spec(), 5, 0);
    // With sigma=8 noise, identical neighboring same-class pixels are rare.
    size_t diffs = 0;
    for (size_t i = 1; i < s.frame.pixel_count(); ++i)
        if (s.truth.classes[i] == s.truth.classes[i - 1] &&
            (s.frame.rgb[i * 3] != s.frame.rgb[(i - 1) * 3])) ++diffs;
    CHECK(diffs > s.frame.pixel_count() / 10);
}

TEST_CASE("unreachable abundance targets throw after the retry budget") {
    SceneSpec spec = small_spec();
    spec.tol_strawberry = 1e-7;  // narrower than one pixel: unreachable
    spec.max_rounds = 5;
    CHECK_THROWS_AS(generate_scene(spec, 1, 0), std::runtime_error);
}

TEST_CASE("scene spec validation rejects bad geometry") {
    SceneSpec s = small_spec();
    s.tol_canopy = -0.01;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);

    s = small_spec();
    s.canopy_depth_min = 0.5;  // overlaps the strawberry band
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);

    s = small_spec();
    s.strawberry_radius_min = 0.05;
    s.strawberry_radius_max = 0.01;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);

    s = small_spec();
    s.target_canopy = 0.6;
    s.target_rigid = 0.5;  // targets exceed the canvas
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("scene intrinsics scale focal length with resolution") {
    CameraIntrinsics full = scene_intrinsics(848, 480);
    CHECK(full.fx == doctest::Approx(430.0));
    CHECK(full.fy == doctest::Approx(430.0));
    CHECK(full.cx == doctest::Approx(424.0));
    CHECK(full.cy == doctest::Approx(240.0));
    CameraIntrinsics half = scene_intrinsics(424, 240);
    CHECK(half.fx == doctest::Approx(215.0));
    full.validate();
    half.validate();
}

// ---------------------------------------------------------------------------
// Dataset round trip

TEST_CASE("gen_dataset is byte-identical for identical inputs") {
    TempDir a("ds_a"), b("ds_b");
    SceneSpec spec = small_spec();
    DatasetSummary sa = gen_dataset(spec, 4, 99, a.str());
    DatasetSummary sb = gen_dataset(spec, 4, 99, b.str());
    CHECK(sa.count == 4);
    CHECK(sb.count == 4);
    CHECK(sa.mean_fractions == sb.mean_fractions);
    CHECK(same_dir_bytes(a.path, b.path));
}

TEST_CASE("dataset survives a save/load round trip") {
    TempDir dir("ds_rt");
    SceneSpec spec = small_spec();
    gen_dataset(spec, 3, 42, dir.str());
    Dataset ds = load_dataset(dir.str());
    REQUIRE(ds.count() == 3);
    CHECK(ds.intrinsics == scene_intrinsics(spec.width, spec.height));
    Scene expected = generate_scene(spec, 42, 1);
    CHECK(ds.scenes[1].frame.rgb == expected.frame.rgb);
    CHECK(ds.scenes[1].frame.depth == expected.frame.depth);
    CHECK(ds.scenes[1].truth.classes == expected.truth.classes);
    for (uint8_t c : ds.scenes[1].truth.confidence) CHECK(c == 255);
}

TEST_CASE("dataset summary reports mean fractions inside the band") {
    TempDir dir("ds_mean");
    SceneSpec spec = small_spec();
    DatasetSummary s = gen_dataset(spec, 6, 2024, dir.str());
    CHECK(s.mean_fractions[0] >= spec.target_strawberry - spec.tol_strawberry);
    CHECK(s.mean_fractions[0] <= spec.target_strawberry + spec.tol_strawberry);
    CHECK(s.mean_fractions[1] >= spec.target_canopy - spec.tol_canopy);
    CHECK(s.mean_fractions[1] <= spec.target_canopy + spec.tol_canopy);
}

TEST_CASE("loading a missing or broken dataset directory throws") {
    CHECK_THROWS_AS(load_dataset("/nonexistent/e5sh/dataset"), std::runtime_error);

    TempDir dir("ds_bad");
    SceneSpec spec = small_spec();
    gen_dataset(spec, 2, 7, dir.str());
    fs::remove(dir.path / "000001.depth");
    CHECK_THROWS_AS(load_dataset(dir.str()), std::runtime_error);
}

TEST_CASE("truncated scene files are rejected") {
    TempDir dir("ds_trunc");
    gen_dataset(small_spec(), 1, 7, dir.str());
    auto bytes = slurp(dir.path / "000000.rgb");
    std::ofstream out(dir.path / "000000.rgb", std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
    out.close();
    CHECK_THROWS_AS(load_dataset(dir.str()), std::runtime_error);
}

// ---------------------------------------------------------------------------
// Experiment config

TEST_CASE("config identity is the four-way label") {
    ExperimentConfig c;
    c.transport = "tcpros";
    c.network = "wifi";
    c.model = "detectron2";
    c.platform = "njxn";
    CHECK(c.identity() == "tcpros|wifi|detectron2|njxn");
}

TEST_CASE("config json round trip preserves every field") {
    ExperimentConfig c;
    c.robots = 3;
    c.frames_per_robot = 12;
    c.transport = "mqtt-qos0";
    c.network = "5g";
    c.backend = "heuristic";
    c.model = "d2go8";
    c.platform = "edge";
    c.seed = 4242;
    c.overhead_ms = 34.3;
    c.pad_up_bytes = 80'000;
    c.pad_down_bytes = 16'000;
    c.workers = 2;
    c.camera_fps = 15.0;
    c.frame_timeout_s = 4.0;
    std::string text = c.to_json_text();
    ExperimentConfig d = ExperimentConfig::from_json_text(text);
    CHECK(d.to_json_text() == text);
    CHECK(d.identity() == c.identity());
    CHECK(d.seed == 4242);
    CHECK(d.pad_up_bytes == 80'000);
}

TEST_CASE("config validation rejects unknown names and bad values") {
    auto bad = [](auto mutate) {
        ExperimentConfig c;
        mutate(c);
        CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    };
    bad([](ExperimentConfig& c) { c.robots = 0; });
    bad([](ExperimentConfig& c) { c.frames_per_robot = 0; });
    bad([](ExperimentConfig& c) { c.transport = "udp"; });
    bad([](ExperimentConfig& c) { c.network = "6g"; });
    bad([](ExperimentConfig& c) { c.backend = "cnn"; });
    bad([](ExperimentConfig& c) { c.platform = "cloud"; });
    bad([](ExperimentConfig& c) { c.model = "resnet"; });
    bad([](ExperimentConfig& c) { c.mode = "replay"; });
    bad([](ExperimentConfig& c) { c.overhead_ms = -1; });
    bad([](ExperimentConfig& c) { c.workers = 0; });
    bad([](ExperimentConfig& c) { c.camera_fps = 0; });
    bad([](ExperimentConfig& c) { c.frame_timeout_s = 0; });
    bad([](ExperimentConfig& c) { c.pad_up_bytes = 64; });
    bad([](ExperimentConfig& c) { c.pad_down_bytes = 8; });
    bad([](ExperimentConfig& c) {
        c.mode = "live";
        c.pad_up_bytes = 80'000;
        c.pad_down_bytes = 16'000;
    });
    bad([](ExperimentConfig& c) {
        c.mode = "live";
        c.network = "wifi";  // non-constant delay cannot run on a real socket
    });
}

TEST_CASE("valid configs pass validation") {
    ExperimentConfig c;
    CHECK_NOTHROW(c.validate());
    c.model = "detectron2";
    c.platform = "njxn";
    CHECK_NOTHROW(c.validate());
    c.mode = "live";
    c.model = "none";
    c.network = "ideal";
    CHECK_NOTHROW(c.validate());
    c.mode = "live";
    c.overhead_ms = 34.3;  // constant delay is emulatable live
    c.network = "wifi";
    CHECK_NOTHROW(c.validate());
}

TEST_CASE("overhead_ms replaces the profile delay with a constant split") {
    ExperimentConfig c;
    c.network = "5g";
    c.overhead_ms = 34.3;
    netem::NetworkProfile p = c.effective_profile();
    CHECK(p.delay.kind == netem::DelaySpec::Kind::Constant);
    CHECK(p.delay.a == doctest::Approx(17.15));
    CHECK(!p.bandwidth_kbps.has_value());
    CHECK(p.loss_prob == doctest::Approx(0.001));  // loss is orthogonal to delay

    ExperimentConfig plain;
    plain.network = "5g";
    netem::NetworkProfile q = plain.effective_profile();
    CHECK(q.delay.kind == netem::DelaySpec::Kind::Normal);
}

TEST_CASE("config json parse errors are invalid_argument") {
    CHECK_THROWS_AS(ExperimentConfig::from_json_text("{nope"), std::invalid_argument);
    CHECK_THROWS_AS(ExperimentConfig::from_json_text(R"({"robots": "three"})"), std::invalid_argument);
    CHECK_THROWS_AS(ExperimentConfig::from_json_text(R"({"transport": "udp"})"), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Action service stage times and per-lane streams

namespace {

Envelope lane_env(Channel ch, uint64_t frame_id, int64_t ts) {
    Frame f;
    f.frame_id = frame_id;
    f.capture_ts_ns = ts;
    f.width = 4;
    f.height = 4;
    f.rgb.assign(4 * 4 * 3, 100);
    f.depth.assign(4 * 4, 700);
    return decode_envelope(encode_frame(f, ch));
}

CameraIntrinsics lane_intrinsics() {
    CameraIntrinsics k;
    k.fx = 4;
    k.fy = 4;
    k.cx = 2;
    k.cy = 2;
    k.width = 4;
    k.height = 4;
    return k;
}

}  // namespace

TEST_CASE("goal stage times are recorded through the worker pool") {
    sim::EventScheduler sched;
    auto inner = std::make_unique<perception::OracleBackend>(
        [](uint64_t) { return LabeledMask::filled(4, 4, ClassId::Canopy); });
    perception::DelayedBackend backend(std::move(inner), perception::LatencyModel::defaults(),
                                       "detectron2", "edge", 11);
    perception::ActionServerConfig cfg;
    cfg.workers = 1;
    cfg.intrinsics = lane_intrinsics();
    perception::ActionServer server(&sched, &backend, cfg);

    server.on_channel_frame(lane_env(Channel::Rgb, 1, 0));
    server.on_channel_frame(lane_env(Channel::Depth, 1, 0));
    REQUIRE(server.has_pair());

    // Two goals through one worker: the second waits in the queue.
    int replies = 0;
    server.on_trigger(101, [&](const perception::TriggerReply& r) {
        CHECK(r.mask.has_value());
        ++replies;
    });
    server.on_trigger(102, [&](const perception::TriggerReply& r) {
        CHECK(r.mask.has_value());
        ++replies;
    });
    sched.run(std::numeric_limits<int64_t>::max());
    CHECK(replies == 2);

    const perception::GoalTimes* a = server.goal_times(101);
    const perception::GoalTimes* b = server.goal_times(102);
    REQUIRE(a != nullptr);
    REQUIRE(b != nullptr);
    CHECK(a->accepted_ns == 0);
    CHECK(a->started_ns == 0);          // worker was free
    CHECK(a->finished_ns > a->started_ns);
    CHECK(b->accepted_ns == 0);
    CHECK(b->started_ns == a->finished_ns);  // queued behind the first goal
    CHECK(b->finished_ns > b->started_ns);

    CHECK(server.goal_times(999) == nullptr);
}

TEST_CASE("not-ready triggers never become goals, so they carry no times") {
    sim::EventScheduler sched;
    perception::HeuristicBackend backend;
    perception::ActionServerConfig cfg;
    cfg.intrinsics = lane_intrinsics();
    perception::ActionServer server(&sched, &backend, cfg);

    bool not_ready = false;
    server.on_trigger(55, [&](const perception::TriggerReply& r) {
        CHECK(!r.mask.has_value());
        CHECK(r.failure == perception::TriggerFailure::NotReady);
        not_ready = true;
    });
    CHECK(not_ready);
    CHECK(server.goal_times(55) == nullptr);
}

TEST_CASE("lanes pair frames independently but share the pool") {
    sim::EventScheduler sched;
    perception::HeuristicBackend backend;
    perception::ActionServerConfig cfg;
    cfg.workers = 2;
    cfg.intrinsics = lane_intrinsics();
    perception::ActionServer server(&sched, &backend, cfg);

    // Lane 1 receives a full pair; lane 0 only an rgb frame.
    server.on_channel_frame(0, lane_env(Channel::Rgb, 10, 0));
    server.on_channel_frame(1, lane_env(Channel::Rgb, 20, 0));
    server.on_channel_frame(1, lane_env(Channel::Depth, 20, 0));

    CHECK(!server.has_pair(0));
    CHECK(server.has_pair(1));
    CHECK(!server.has_pair());  // default accessor is lane 0

    bool lane0_not_ready = false, lane1_ok = false;
    server.on_trigger(0, 500, [&](const perception::TriggerReply& r) {
        CHECK(r.failure == perception::TriggerFailure::NotReady);
        lane0_not_ready = true;
    });
    server.on_trigger(1, 501, [&](const perception::TriggerReply& r) {
        CHECK(r.mask.has_value());
        CHECK(r.frame_id == 20);
        lane1_ok = true;
    });
    sched.run(std::numeric_limits<int64_t>::max());
    CHECK(lane0_not_ready);
    CHECK(lane1_ok);

    // The late depth frame completes lane 0's pair.
    server.on_channel_frame(0, lane_env(Channel::Depth, 10, 0));
    CHECK(server.has_pair(0));
    bool lane0_ok = false;
    server.on_trigger(0, 502, [&](const perception::TriggerReply& r) {
        CHECK(r.mask.has_value());
        CHECK(r.frame_id == 10);
        lane0_ok = true;
    });
    sched.run(std::numeric_limits<int64_t>::max());
    CHECK(lane0_ok);
}
