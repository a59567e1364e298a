#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "e5sh/perception/backend.hpp"
#include "e5sh/perception/sync.hpp"
#include "e5sh/sim/scheduler.hpp"

namespace e5sh::perception {

enum class ActionStatus : uint8_t { Pending = 0, Active = 1, Succeeded = 2, Aborted = 3 };

const char* action_status_name(ActionStatus s);

// Failure codes carried on the wire when a trigger yields no mask.
enum class TriggerFailure : uint8_t {
    NotReady = 0x01,  // no synchronized pair was available
    Aborted = 0x02,   // a goal was created but the backend failed
};

struct ActionGoal {
    uint64_t goal_id = 0;
    Frame frame;
};

struct TriggerReply {
    uint64_t goal_id = 0;
    std::optional<LabeledMask> mask;  // set iff the goal succeeded
    uint64_t frame_id = 0;
    int64_t capture_ts_ns = 0;
    TriggerFailure failure = TriggerFailure::NotReady;  // meaningful iff !mask
};

// Trigger wire format. Request: 8-byte little-endian goal id. Reply: the same
// goal id followed by either a mask envelope or a single failure byte.
std::vector<uint8_t> encode_trigger_request(uint64_t goal_id);
uint64_t decode_trigger_request(const std::vector<uint8_t>& bytes);
std::vector<uint8_t> encode_trigger_reply(const TriggerReply& reply);
TriggerReply decode_trigger_reply(const std::vector<uint8_t>& bytes);

struct ActionServerConfig {
    int workers = 3;  // concurrent goals; sized for the robots served
    SyncConfig sync;
    CameraIntrinsics intrinsics;
};

// Virtual-time milestones of one goal; -1 until the stage is reached.
struct GoalTimes {
    int64_t accepted_ns = -1;  // goal entered the worker queue
    int64_t started_ns = -1;   // a worker began the segmentation
    int64_t finished_ns = -1;  // result handed to the reply callback
};

// Edge-side service: consumes the camera stream, keeps the latest
// synchronized pair, and answers triggers by running the backend over a
// FIFO worker pool in virtual time.
class ActionServer {
  public:
    using ReplyFn = std::function<void(const TriggerReply&)>;

    struct Counters {
        uint64_t triggers = 0;
        uint64_t duplicate_triggers = 0;
        uint64_t not_ready = 0;
        uint64_t succeeded = 0;
        uint64_t aborted = 0;
        uint64_t frames_in = 0;
        uint64_t pairs_synced = 0;
    };

    ActionServer(sim::EventScheduler* sched, SegmentationBackend* backend, ActionServerConfig cfg = {});

    // Camera stream input (decoded envelopes, any pairable channel). A lane is
    // one robot's sensor stream: frames pair only within their lane, while the
    // worker pool is shared across all lanes.
    void on_channel_frame(uint64_t lane, Envelope env);
    void on_channel_frame(Envelope env) { on_channel_frame(0, std::move(env)); }

    // Service entry. NotReady replies fire synchronously; goal results are
    // delivered through the scheduler after the backend's compute time.
    void on_trigger(uint64_t lane, uint64_t goal_id, ReplyFn reply);
    void on_trigger(uint64_t goal_id, ReplyFn reply) { on_trigger(0, goal_id, std::move(reply)); }

    // Transport adapter: raw request bytes in, raw reply bytes out.
    void on_trigger_bytes(const std::vector<uint8_t>& request,
                          std::function<void(std::vector<uint8_t>)> send_reply);

    bool has_pair(uint64_t lane = 0) const;
    size_t active() const { return active_; }
    size_t queued() const { return queue_.size(); }
    const Counters& counters() const { return counters_; }
    const FrameSynchronizer& sync() const { return lanes_.at(0).sync; }

    ActionStatus status(uint64_t goal_id) const;
    const std::vector<ActionStatus>& status_history(uint64_t goal_id) const;

    // Stage times for a goal that entered the pool; nullptr for unknown ids
    // (including triggers answered NotReady, which never become goals).
    const GoalTimes* goal_times(uint64_t goal_id) const;

  private:
    struct QueuedGoal {
        ActionGoal goal;
        ReplyFn reply;
    };

    struct Lane {
        explicit Lane(const SyncConfig& c) : sync(c) {}
        FrameSynchronizer sync;
        std::optional<SyncedPair> latest;
    };

    void record(uint64_t goal_id, ActionStatus s);
    void pump();
    Lane& lane(uint64_t id);

    sim::EventScheduler* sched_;
    SegmentationBackend* backend_;
    ActionServerConfig cfg_;
    std::map<uint64_t, Lane> lanes_;
    std::deque<QueuedGoal> queue_;
    size_t active_ = 0;
    Counters counters_;
    std::map<uint64_t, std::vector<ActionStatus>> history_;
    std::map<uint64_t, GoalTimes> times_;
};

struct TriggerTiming {
    int64_t t_request = -1;
    int64_t t_goal_sent = -1;
    int64_t t_result_received = -1;
};

struct ActionClientConfig {
    // Namespaces goal ids so several robots can share one service.
    uint64_t robot_id = 0;
};

// Robot-side requester: stamps each trigger, ships the request through the
// configured transport, and matches replies back to goals by id.
class ActionClient {
  public:
    using SendFn = std::function<void(std::vector<uint8_t>)>;
    using ResultFn = std::function<void(const TriggerReply&, const TriggerTiming&)>;

    ActionClient(sim::EventScheduler* sched, SendFn send, ActionClientConfig cfg = {});

    void set_result_handler(ResultFn fn) { on_result_ = std::move(fn); }

    uint64_t trigger();
    void on_reply_bytes(const std::vector<uint8_t>& bytes, int64_t now_ns);

    size_t outstanding() const { return outstanding_; }
    uint64_t triggers_sent() const { return triggers_sent_; }
    uint64_t results_received() const { return results_received_; }
    const TriggerTiming* timing(uint64_t goal_id) const;

  private:
    sim::EventScheduler* sched_;
    SendFn send_;
    ActionClientConfig cfg_;
    ResultFn on_result_;
    uint64_t next_seq_ = 1;
    size_t outstanding_ = 0;
    uint64_t triggers_sent_ = 0;
    uint64_t results_received_ = 0;
    std::map<uint64_t, TriggerTiming> timings_;
};

}  // namespace e5sh::perception
