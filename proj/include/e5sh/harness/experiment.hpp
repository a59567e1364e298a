#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "e5sh/metrics/records.hpp"
#include "e5sh/netem/profile.hpp"

namespace e5sh::harness {

// One experiment: a fleet of robots streaming frames to the edge service
// over an emulated (sim) or loopback (live) network.
struct ExperimentConfig {
    int robots = 1;
    int frames_per_robot = 30;
    std::string transport = "mqtt-qos1";  // tcpros | mqtt-qos0 | mqtt-qos1
    std::string network = "ideal";        // builtin profile name
    std::string backend = "oracle";       // oracle | heuristic
    std::string model = "none";           // none | detectron2 | d2go8 | d2go32
    std::string platform = "edge";        // edge | njxn
    std::string mode = "sim";             // sim | live
    uint64_t seed = 1;
    // When positive, replaces the profile's delay with a constant so the
    // per-frame network overhead (uplink + downlink) equals this value.
    double overhead_ms = 0;
    // When positive, the wire carries fixed-size stand-in payloads instead
    // of pixel data: per frame, uplink payload bytes total pad_up_bytes and
    // the reply payload totals pad_down_bytes (sim only).
    uint64_t pad_up_bytes = 0;
    uint64_t pad_down_bytes = 0;
    int workers = 3;
    double camera_fps = 30.0;            // capture cadence ceiling
    double frame_timeout_s = 10.0;       // per-frame giveup (virtual in sim)

    // "<transport>|<network>|<model>|<platform>": the configuration label
    // recorded with every frame and used to group report rows.
    std::string identity() const;

    // Throws std::invalid_argument on unknown names or conflicting fields
    // (e.g. live mode with virtual-only profile features).
    void validate() const;

    // The profile this run uses: the named builtin, with the delay replaced
    // by Constant(overhead_ms / 2) per direction when overhead_ms is set.
    netem::NetworkProfile effective_profile() const;

    static ExperimentConfig from_json_text(const std::string& text);
    std::string to_json_text() const;
};

// Totals the harness keeps alongside the per-frame records, so no wire byte
// goes unaccounted: every byte a link carried is either attributed to a
// frame record or counted here as connection setup / keepalive traffic.
struct TrafficTotals {
    uint64_t link_bytes_up = 0;     // all bytes sent robot -> edge
    uint64_t link_bytes_down = 0;   // all bytes sent edge -> robot
    uint64_t setup_bytes_up = 0;    // handshake/subscribe traffic, uplink
    uint64_t setup_bytes_down = 0;  // handshake/ack traffic, downlink
};

struct RunResult {
    std::vector<metrics::ExperimentRecord> records;
    TrafficTotals traffic;
    uint64_t frames_completed = 0;
    uint64_t frames_failed = 0;
    int64_t virtual_end_ns = 0;  // sim: clock when the last robot finished
    // With the oracle backend the mask delivered to the robot must equal the
    // stored ground truth bit for bit; any transport/codec corruption counts.
    uint64_t oracle_mask_mismatches = 0;
    // Triggers re-sent after a NotReady or stale-frame verdict.
    uint64_t trigger_retries = 0;

    std::string to_csv() const { return metrics::records_to_csv(records); }
};

// Dispatches on config.mode. The dataset directory must already exist.
RunResult run_experiment(const ExperimentConfig& config, const std::string& dataset_dir);

RunResult run_experiment_sim(const ExperimentConfig& config, const std::string& dataset_dir);
RunResult run_experiment_live(const ExperimentConfig& config, const std::string& dataset_dir);

}  // namespace e5sh::harness
