#include <stdexcept>

#include <json.hpp>

#include "e5sh/harness/experiment.hpp"
#include "e5sh/perception/backend.hpp"

namespace e5sh::harness {

using nlohmann::json;

std::string ExperimentConfig::identity() const {
    return transport + "|" + network + "|" + model + "|" + platform;
}

void ExperimentConfig::validate() const {
    if (robots < 1) throw std::invalid_argument("config: robots must be >= 1");
    if (frames_per_robot < 1) throw std::invalid_argument("config: frames_per_robot must be >= 1");
    if (transport != "tcpros" && transport != "mqtt-qos0" && transport != "mqtt-qos1")
        throw std::invalid_argument("config: unknown transport '" + transport + "'");
    if (!netem::NetworkProfile::is_builtin(network))
        throw std::invalid_argument("config: unknown network profile '" + network + "'");
    if (backend != "oracle" && backend != "heuristic")
        throw std::invalid_argument("config: unknown backend '" + backend + "'");
    if (platform != "edge" && platform != "njxn")
        throw std::invalid_argument("config: unknown platform '" + platform + "'");
    if (model != "none" && !perception::LatencyModel::defaults().contains(model, platform))
        throw std::invalid_argument("config: no latency entry for model '" + model +
                                    "' on platform '" + platform + "'");
    if (mode != "sim" && mode != "live")
        throw std::invalid_argument("config: unknown mode '" + mode + "'");
    if (overhead_ms < 0) throw std::invalid_argument("config: overhead_ms must be >= 0");
    if (workers < 1) throw std::invalid_argument("config: workers must be >= 1");
    if (camera_fps <= 0) throw std::invalid_argument("config: camera_fps must be positive");
    if (frame_timeout_s <= 0) throw std::invalid_argument("config: frame_timeout_s must be positive");

    if (mode == "live") {
        if (pad_up_bytes || pad_down_bytes)
            throw std::invalid_argument("config: payload padding is sim-only");
        netem::NetworkProfile p = effective_profile();
        if (p.delay.kind != netem::DelaySpec::Kind::Constant)
            throw std::invalid_argument(
                "config: live mode cannot emulate virtual-only profile features "
                "(non-constant delay)");
        if (p.bandwidth_kbps)
            throw std::invalid_argument(
                "config: live mode cannot emulate virtual-only profile features "
                "(bandwidth shaping)");
    }
    if (pad_up_bytes && pad_up_bytes < 128)
        throw std::invalid_argument("config: pad_up_bytes too small to carry the stand-ins");
    if (pad_down_bytes && pad_down_bytes < 64)
        throw std::invalid_argument("config: pad_down_bytes too small to carry the stand-in");
}

netem::NetworkProfile ExperimentConfig::effective_profile() const {
    netem::NetworkProfile p = netem::NetworkProfile::builtin(network);
    if (overhead_ms > 0) {
        p.delay = {netem::DelaySpec::Kind::Constant, overhead_ms / 2.0, 0.0};
        p.bandwidth_kbps.reset();
    }
    return p;
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: bad JSON: ") + e.what());
    }
    ExperimentConfig c;
    try {
        c.robots = j.value("robots", c.robots);
        c.frames_per_robot = j.value("frames_per_robot", c.frames_per_robot);
        c.transport = j.value("transport", c.transport);
        c.network = j.value("network", c.network);
        c.backend = j.value("backend", c.backend);
        c.model = j.value("model", c.model);
        c.platform = j.value("platform", c.platform);
        c.mode = j.value("mode", c.mode);
        c.seed = j.value("seed", c.seed);
        c.overhead_ms = j.value("overhead_ms", c.overhead_ms);
        c.pad_up_bytes = j.value("pad_up_bytes", c.pad_up_bytes);
        c.pad_down_bytes = j.value("pad_down_bytes", c.pad_down_bytes);
        c.workers = j.value("workers", c.workers);
        c.camera_fps = j.value("camera_fps", c.camera_fps);
        c.frame_timeout_s = j.value("frame_timeout_s", c.frame_timeout_s);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: bad JSON shape: ") + e.what());
    }
    c.validate();
    return c;
}

std::string ExperimentConfig::to_json_text() const {
    validate();
    json j;
    j["robots"] = robots;
    j["frames_per_robot"] = frames_per_robot;
    j["transport"] = transport;
    j["network"] = network;
    j["backend"] = backend;
    j["model"] = model;
    j["platform"] = platform;
    j["mode"] = mode;
    j["seed"] = seed;
    j["overhead_ms"] = overhead_ms;
    j["pad_up_bytes"] = pad_up_bytes;
    j["pad_down_bytes"] = pad_down_bytes;
    j["workers"] = workers;
    j["camera_fps"] = camera_fps;
    j["frame_timeout_s"] = frame_timeout_s;
    return j.dump(2);
}

RunResult run_experiment(const ExperimentConfig& config, const std::string& dataset_dir) {
    config.validate();
    if (config.mode == "live") return run_experiment_live(config, dataset_dir);
    return run_experiment_sim(config, dataset_dir);
}

}  // namespace e5sh::harness
