#include "e5sh/perception/action.hpp"

#include <stdexcept>

#include "e5sh/bytes.hpp"
#include "e5sh/codec.hpp"

namespace e5sh::perception {

const char* action_status_name(ActionStatus s) {
    switch (s) {
        case ActionStatus::Pending: return "pending";
        case ActionStatus::Active: return "active";
        case ActionStatus::Succeeded: return "succeeded";
        case ActionStatus::Aborted: return "aborted";
    }
    return "?";
}

std::vector<uint8_t> encode_trigger_request(uint64_t goal_id) {
    ByteWriter w;
    w.u64le(goal_id);
    return w.take();
}

uint64_t decode_trigger_request(const std::vector<uint8_t>& bytes) {
    if (bytes.size() != 8)
        throw WireError(WireError::Kind::Format, "trigger request must be exactly 8 bytes");
    return ByteReader(bytes).u64le();
}

std::vector<uint8_t> encode_trigger_reply(const TriggerReply& reply) {
    ByteWriter w;
    w.u64le(reply.goal_id);
    if (reply.mask) {
        w.bytes(encode_mask(*reply.mask, reply.frame_id, reply.capture_ts_ns));
    } else {
        w.u8(static_cast<uint8_t>(reply.failure));
    }
    return w.take();
}

TriggerReply decode_trigger_reply(const std::vector<uint8_t>& bytes) {
    ByteReader r(bytes);
    TriggerReply reply;
    reply.goal_id = r.u64le();
    if (r.remaining() == 0)
        throw WireError(WireError::Kind::Truncated, "trigger reply carries no status or mask");
    if (r.remaining() == 1) {
        uint8_t code = r.u8();
        if (code != static_cast<uint8_t>(TriggerFailure::NotReady) &&
            code != static_cast<uint8_t>(TriggerFailure::Aborted))
            throw WireError(WireError::Kind::Format, "unknown trigger failure code");
        reply.failure = static_cast<TriggerFailure>(code);
        return reply;
    }
    Envelope env = decode_envelope(r.bytes(r.remaining()));
    reply.mask = envelope_mask(env);
    reply.frame_id = env.frame_id;
    reply.capture_ts_ns = env.capture_ts_ns;
    return reply;
}

ActionServer::ActionServer(sim::EventScheduler* sched, SegmentationBackend* backend,
                           ActionServerConfig cfg)
    : sched_(sched), backend_(backend), cfg_(std::move(cfg)) {
    if (!sched_) throw std::invalid_argument("action server: scheduler required");
    if (!backend_) throw std::invalid_argument("action server: backend required");
    if (cfg_.workers < 1) throw std::invalid_argument("action server: worker pool must be positive");
    lanes_.emplace(0, Lane(cfg_.sync));
}

ActionServer::Lane& ActionServer::lane(uint64_t id) {
    auto it = lanes_.find(id);
    if (it == lanes_.end()) it = lanes_.emplace(id, Lane(cfg_.sync)).first;
    return it->second;
}

bool ActionServer::has_pair(uint64_t lane_id) const {
    auto it = lanes_.find(lane_id);
    return it != lanes_.end() && it->second.latest.has_value();
}

void ActionServer::on_channel_frame(uint64_t lane_id, Envelope env) {
    ++counters_.frames_in;
    Lane& l = lane(lane_id);
    if (auto pair = l.sync.push(std::move(env))) {
        ++counters_.pairs_synced;
        l.latest = std::move(*pair);
    }
}

void ActionServer::record(uint64_t goal_id, ActionStatus s) { history_[goal_id].push_back(s); }

ActionStatus ActionServer::status(uint64_t goal_id) const {
    auto it = history_.find(goal_id);
    if (it == history_.end() || it->second.empty())
        throw std::out_of_range("action server: unknown goal id");
    return it->second.back();
}

const std::vector<ActionStatus>& ActionServer::status_history(uint64_t goal_id) const {
    auto it = history_.find(goal_id);
    if (it == history_.end()) throw std::out_of_range("action server: unknown goal id");
    return it->second;
}

const GoalTimes* ActionServer::goal_times(uint64_t goal_id) const {
    auto it = times_.find(goal_id);
    return it == times_.end() ? nullptr : &it->second;
}

void ActionServer::on_trigger(uint64_t lane_id, uint64_t goal_id, ReplyFn reply) {
    ++counters_.triggers;
    if (history_.count(goal_id)) {
        // Redelivered request (at-least-once transport): the original goal is
        // already running or finished and its reply takes the same path.
        ++counters_.duplicate_triggers;
        return;
    }
    Lane& l = lane(lane_id);
    if (!l.latest) {
        ++counters_.not_ready;
        TriggerReply r;
        r.goal_id = goal_id;
        r.failure = TriggerFailure::NotReady;
        reply(r);
        return;
    }

    QueuedGoal q;
    q.goal.goal_id = goal_id;
    try {
        q.goal.frame = combine(*l.latest, cfg_.intrinsics);
    } catch (const std::exception&) {
        // Malformed pair: the service answers, but no goal enters the pool.
        ++counters_.aborted;
        TriggerReply r;
        r.goal_id = goal_id;
        r.failure = TriggerFailure::Aborted;
        reply(r);
        return;
    }
    q.reply = std::move(reply);
    record(goal_id, ActionStatus::Pending);
    times_[goal_id].accepted_ns = sched_->now_ns();
    queue_.push_back(std::move(q));
    pump();
}

void ActionServer::pump() {
    while (active_ < static_cast<size_t>(cfg_.workers) && !queue_.empty()) {
        QueuedGoal q = std::move(queue_.front());
        queue_.pop_front();
        record(q.goal.goal_id, ActionStatus::Active);
        times_[q.goal.goal_id].started_ns = sched_->now_ns();
        ++active_;

        SegmentationOutput out = backend_->segment(q.goal.frame);
        int64_t done_at = sched_->now_ns() + std::max<int64_t>(0, out.compute_ns);
        uint64_t goal_id = q.goal.goal_id;
        uint64_t frame_id = q.goal.frame.frame_id;
        int64_t ts = q.goal.frame.capture_ts_ns;
        sched_->schedule_at(done_at, [this, goal_id, frame_id, ts, out = std::move(out),
                                      reply = std::move(q.reply)]() mutable {
            TriggerReply r;
            r.goal_id = goal_id;
            r.frame_id = frame_id;
            r.capture_ts_ns = ts;
            times_[goal_id].finished_ns = sched_->now_ns();
            if (out.mask) {
                record(goal_id, ActionStatus::Succeeded);
                ++counters_.succeeded;
                r.mask = std::move(out.mask);
            } else {
                record(goal_id, ActionStatus::Aborted);
                ++counters_.aborted;
                r.failure = TriggerFailure::Aborted;
            }
            reply(r);
            --active_;
            pump();
        });
    }
}

void ActionServer::on_trigger_bytes(const std::vector<uint8_t>& request,
                                    std::function<void(std::vector<uint8_t>)> send_reply) {
    uint64_t goal_id = decode_trigger_request(request);
    on_trigger(goal_id, [send_reply = std::move(send_reply)](const TriggerReply& r) {
        send_reply(encode_trigger_reply(r));
    });
}

ActionClient::ActionClient(sim::EventScheduler* sched, SendFn send, ActionClientConfig cfg)
    : sched_(sched), send_(std::move(send)), cfg_(cfg) {
    if (!sched_) throw std::invalid_argument("action client: scheduler required");
    if (!send_) throw std::invalid_argument("action client: send function required");
}

uint64_t ActionClient::trigger() {
    uint64_t goal_id = (cfg_.robot_id << 32) | next_seq_++;
    TriggerTiming t;
    t.t_request = sched_->now_ns();
    send_(encode_trigger_request(goal_id));
    t.t_goal_sent = sched_->now_ns();
    timings_[goal_id] = t;
    ++outstanding_;
    ++triggers_sent_;
    return goal_id;
}

void ActionClient::on_reply_bytes(const std::vector<uint8_t>& bytes, int64_t now_ns) {
    TriggerReply reply = decode_trigger_reply(bytes);
    auto it = timings_.find(reply.goal_id);
    if (it == timings_.end()) return;  // not ours (shared reply stream) or duplicate
    if (it->second.t_result_received < 0) {
        it->second.t_result_received = now_ns;
        --outstanding_;
        ++results_received_;
    }
    if (on_result_) on_result_(reply, it->second);
}

const TriggerTiming* ActionClient::timing(uint64_t goal_id) const {
    auto it = timings_.find(goal_id);
    return it == timings_.end() ? nullptr : &it->second;
}

}  // namespace e5sh::perception
