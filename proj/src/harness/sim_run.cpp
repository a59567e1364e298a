#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "e5sh/bytes.hpp"
#include "e5sh/codec.hpp"
#include "e5sh/harness/dataset.hpp"
#include "e5sh/harness/experiment.hpp"
#include "e5sh/mqtt/broker.hpp"
#include "e5sh/mqtt/client.hpp"
#include "e5sh/netem/link.hpp"
#include "e5sh/occmap/instances.hpp"
#include "e5sh/perception/action.hpp"
#include "e5sh/perception/backend.hpp"
#include "e5sh/sim/rng.hpp"
#include "e5sh/sim/scheduler.hpp"
#include "e5sh/transport/duplex.hpp"
#include "e5sh/transport/tcpros.hpp"

namespace e5sh::harness {
namespace {

constexpr int64_t kMsNs = 1'000'000;
// Frame ids pack (robot, frame index); goal ids append a retry counter so a
// burned id (duplicate-trigger dedup at the server) never blocks a retry.
constexpr uint64_t kFrameIndexCap = 1'000'000;
constexpr int kMaxTriggerAttempts = 64;
constexpr int64_t kTriggerBackoffNs = 5 * kMsNs;
constexpr int64_t kSetupPollNs = 250 * kMsNs;
constexpr int64_t kSetupDeadlineNs = 60'000 * kMsNs;
constexpr int64_t kClientTickNs = 50 * kMsNs;

uint64_t frame_uid(uint64_t robot, uint64_t k) { return robot * kFrameIndexCap + k + 1; }
uint64_t robot_of_uid(uint64_t fid) { return (fid - 1) / kFrameIndexCap; }
uint64_t index_of_uid(uint64_t fid) { return (fid - 1) % kFrameIndexCap; }
uint64_t goal_uid(uint64_t fid, uint32_t attempt) { return (fid << 16) | attempt; }

// Each robot walks the shared scene store at a per-robot offset so a fleet
// does not stream identical pixels in lockstep.
size_t scene_of(uint64_t robot, uint64_t k, size_t count) {
    return static_cast<size_t>((k + robot * 17) % count);
}

void patch_envelope_ids(std::vector<uint8_t>& wire, uint64_t frame_id, int64_t capture_ts_ns) {
    // Envelope header layout: magic(4) version(1) channel(1) encoding(1),
    // then frame_id u64le at offset 7 and capture_ts u64le at offset 15.
    for (int i = 0; i < 8; ++i) wire[7 + static_cast<size_t>(i)] = static_cast<uint8_t>(frame_id >> (8 * i));
    auto uts = static_cast<uint64_t>(capture_ts_ns);
    for (int i = 0; i < 8; ++i) wire[15 + static_cast<size_t>(i)] = static_cast<uint8_t>(uts >> (8 * i));
}

// Fixed-size stand-in for one camera message: a real envelope header with an
// empty payload, zero-padded to the target wire size. Carries exactly the
// identity the edge needs to swap the local pixel store back in.
std::vector<uint8_t> stub_envelope(Channel channel, uint64_t frame_id, int64_t capture_ts_ns,
                                   size_t wire_bytes) {
    ByteWriter w;
    w.u8('E');
    w.u8('5');
    w.u8('S');
    w.u8('H');
    w.u8(1);
    w.u8(static_cast<uint8_t>(channel));
    w.u8(static_cast<uint8_t>(Encoding::Raw));
    w.u64le(frame_id);
    w.u64le(static_cast<uint64_t>(capture_ts_ns));
    w.u16le(0);
    w.u16le(0);
    w.u32le(0);
    std::vector<uint8_t> v = w.take();
    if (wire_bytes < v.size()) throw std::invalid_argument("stand-in smaller than an envelope header");
    v.resize(wire_bytes, 0);
    return v;
}

std::vector<uint8_t> stub_reply(uint64_t goal_id, size_t wire_bytes) {
    ByteWriter w;
    w.u64le(goal_id);
    std::vector<uint8_t> v = w.take();
    if (wire_bytes < v.size()) throw std::invalid_argument("stand-in smaller than a goal id");
    v.resize(wire_bytes, 0);
    return v;
}

std::vector<uint8_t> depth_payload(const Frame& f) {
    std::vector<uint8_t> out;
    out.reserve(f.depth.size() * 2);
    for (uint16_t d : f.depth) {
        out.push_back(static_cast<uint8_t>(d & 0xFF));
        out.push_back(static_cast<uint8_t>(d >> 8));
    }
    return out;
}

// The envelope the edge reconstructs from its local store when the wire
// carried a stand-in instead of pixels.
Envelope store_envelope(const Frame& f, Channel channel, uint64_t frame_id, int64_t capture_ts_ns) {
    Envelope e;
    e.channel = channel;
    e.encoding = Encoding::Raw;
    e.frame_id = frame_id;
    e.capture_ts_ns = capture_ts_ns;
    e.width = f.width;
    e.height = f.height;
    e.payload = (channel == Channel::Rgb) ? f.rgb : depth_payload(f);
    return e;
}

// In-process channel between co-located endpoints (edge service and broker
// share the host). Delivery still goes through the scheduler so handlers are
// never re-entered from inside a send; these bytes are not network traffic.
class LoopbackDuplex final : public transport::Duplex {
  public:
    explicit LoopbackDuplex(sim::EventScheduler* sched) : sched_(sched) {}

    void link_peer(LoopbackDuplex* peer) { peer_ = peer; }

    std::optional<uint64_t> send(std::vector<uint8_t> message) override {
        LoopbackDuplex* peer = peer_;
        sched_->schedule_after(0, [peer, m = std::move(message)]() mutable {
            if (peer->receiver_) peer->receiver_(std::move(m), peer->sched_->now_ns());
        });
        return next_id_++;
    }
    bool cancel(uint64_t) override { return false; }
    void set_receiver(Receiver receiver) override { receiver_ = std::move(receiver); }
    uint64_t in_flight() const override { return 0; }
    int64_t now_ns() const override { return sched_->now_ns(); }

  private:
    sim::EventScheduler* sched_;
    LoopbackDuplex* peer_ = nullptr;
    Receiver receiver_;
    uint64_t next_id_ = 1;
};

// Transport-specific wiring of one robot to the edge. Byte counters follow
// the semantic direction (up = robot -> edge), whichever physical link ends
// the endpoints hold.
class WirePath {
  public:
    virtual ~WirePath() = default;
    virtual void send_rgb(std::vector<uint8_t> wire) = 0;
    virtual void send_depth(std::vector<uint8_t> wire) = 0;
    virtual void send_trigger(std::vector<uint8_t> wire) = 0;
    virtual void send_reply(std::vector<uint8_t> wire) = 0;
    virtual void setup_kick() = 0;  // (re)drive connect/subscribe/handshake
    virtual bool setup_done() const = 0;
    virtual void tick(int64_t) {}
    virtual uint64_t bytes_up() const = 0;
    virtual uint64_t bytes_down() const = 0;
};

struct RobotCtx {
    int id = 0;
    std::unique_ptr<WirePath> path;

    int next_k = 0;
    bool done = false;
    bool frame_active = false;
    bool retry_pending = false;
    uint64_t epoch = 0;  // bumped on frame close; stale watchdog/retry events no-op
    int64_t cur_capture_ns = 0;
    size_t cur_scene = 0;
    uint64_t cur_fid = 0;
    uint64_t cur_goal = 0;
    uint32_t attempt = 0;
    metrics::ExperimentRecord rec;

    uint64_t base_up = 0, base_down = 0;          // counters at frame start
    uint64_t last_end_up = 0, last_end_down = 0;  // counters at last frame close
};

struct RunEnv {
    RunEnv(const ExperimentConfig& c, Dataset d) : cfg(c), ds(std::move(d)) {}

    const ExperimentConfig& cfg;
    Dataset ds;
    sim::EventScheduler sched;
    netem::NetworkProfile profile;
    bool shape = false;  // wire carries fixed-size stand-ins instead of pixels
    bool is_mqtt = false;
    uint8_t qos = 0;

    std::unique_ptr<perception::SegmentationBackend> backend;
    std::unique_ptr<perception::ActionServer> server;

    // mqtt infrastructure (broker co-located with the edge service)
    std::unique_ptr<mqtt::SimBroker> broker;
    std::unique_ptr<LoopbackDuplex> edge_end;
    std::unique_ptr<LoopbackDuplex> broker_end;
    std::unique_ptr<mqtt::MqttClient> edge_cli;

    std::vector<std::unique_ptr<RobotCtx>> robots;
    std::map<uint64_t, perception::TriggerReply> reply_store;  // shape mode, keyed by goal

    // content-mode wire cache: encoded (rgb, depth) per scene, ids patched per frame
    std::vector<std::vector<uint8_t>> rgb_wire, depth_wire;

    std::vector<metrics::ExperimentRecord> records;
    TrafficTotals traffic;
    uint64_t completed = 0, failed = 0;
    uint64_t mask_mismatches = 0;
    uint64_t trigger_retries = 0;
    size_t robots_done = 0;
    bool setup_complete = false;

    int64_t frame_interval_ns = 0;
    int64_t timeout_ns = 0;
    size_t up_rgb_bytes = 0, up_depth_bytes = 0;  // shape-mode stand-in sizes

    bool finished() const { return robots_done == robots.size(); }
};

void start_frame(RunEnv& env, RobotCtx& r);
void finalize_frame(RunEnv& env, RobotCtx& r, bool success);

void send_trigger(RunEnv& env, RobotCtx& r) {
    r.cur_goal = goal_uid(r.cur_fid, r.attempt++);
    r.path->send_trigger(perception::encode_trigger_request(r.cur_goal));
}

void schedule_retry(RunEnv& env, RobotCtx& r) {
    if (r.retry_pending) return;  // duplicate delivery of the same verdict
    if (r.attempt >= kMaxTriggerAttempts) {
        finalize_frame(env, r, false);
        return;
    }
    r.retry_pending = true;
    ++env.trigger_retries;
    RobotCtx* rp = &r;
    uint64_t ep = r.epoch;
    env.sched.schedule_after(kTriggerBackoffNs, [&env, rp, ep] {
        if (!rp->frame_active || rp->epoch != ep) return;
        rp->retry_pending = false;
        send_trigger(env, *rp);
    });
}

void fill_goal_stages(RunEnv& env, RobotCtx& r, uint64_t goal_id) {
    if (const perception::GoalTimes* t = env.server->goal_times(goal_id)) {
        r.rec.t_goal = t->accepted_ns;
        r.rec.t_seg_start = t->started_ns;
        r.rec.t_seg_end = t->finished_ns;
    }
}

void on_robot_reply(RunEnv& env, int robot, const std::vector<uint8_t>& payload, int64_t now_ns) {
    RobotCtx& r = *env.robots[static_cast<size_t>(robot)];

    perception::TriggerReply rep;
    if (env.shape) {
        uint64_t goal = ByteReader(payload).u64le();
        auto it = env.reply_store.find(goal);
        if (it == env.reply_store.end()) return;  // duplicate of an already-consumed reply
        rep = it->second;
        env.reply_store.erase(it);
    } else {
        rep = perception::decode_trigger_reply(payload);
    }

    if (!r.frame_active || rep.goal_id != r.cur_goal) return;  // stale frame or old attempt

    if (!rep.mask) {
        if (rep.failure == perception::TriggerFailure::NotReady) {
            schedule_retry(env, r);  // pair not formed yet (or lost upstream)
        } else {
            fill_goal_stages(env, r, rep.goal_id);
            finalize_frame(env, r, false);  // backend abort: give the frame up
        }
        return;
    }
    if (rep.frame_id != r.cur_fid) {
        // The service answered with the previous frame still latest; ask again
        // once our own frames have had time to arrive.
        schedule_retry(env, r);
        return;
    }

    r.rec.t_result = now_ns;
    fill_goal_stages(env, r, rep.goal_id);

    const Scene& sc = env.ds.scenes[r.cur_scene];
    if (env.cfg.backend == "oracle" && !(*rep.mask == sc.truth)) ++env.mask_mismatches;

    // Planning-map build closes the cycle; it runs on data already in hand,
    // so it costs no virtual time of its own.
    auto instances = occmap::extract_instances(*rep.mask);
    std::optional<occmap::StrawberryInstance> target;
    for (const auto& inst : instances)
        if (inst.is_target) target = inst;
    occmap::PlanningMaps maps = occmap::build_planning_maps(*rep.mask, sc.frame.depth, env.ds.intrinsics, target);
    (void)maps;
    r.rec.t_map_done = env.sched.now_ns();

    finalize_frame(env, r, true);
}

void on_edge_frame(RunEnv& env, int robot, const std::vector<uint8_t>& payload) {
    Envelope e = decode_envelope(payload);
    if (env.shape) {
        uint64_t k = index_of_uid(e.frame_id);
        size_t idx = scene_of(static_cast<uint64_t>(robot), k, env.ds.count());
        e = store_envelope(env.ds.scenes[idx].frame, e.channel, e.frame_id, e.capture_ts_ns);
    }
    env.server->on_channel_frame(static_cast<uint64_t>(robot), std::move(e));
}

void on_edge_trigger(RunEnv& env, int robot, const std::vector<uint8_t>& payload) {
    uint64_t goal = perception::decode_trigger_request(payload);
    env.server->on_trigger(static_cast<uint64_t>(robot), goal,
                           [&env, robot](const perception::TriggerReply& rep) {
                               RobotCtx& r = *env.robots[static_cast<size_t>(robot)];
                               if (env.shape) {
                                   env.reply_store[rep.goal_id] = rep;
                                   r.path->send_reply(stub_reply(rep.goal_id, env.cfg.pad_down_bytes));
                               } else {
                                   r.path->send_reply(perception::encode_trigger_reply(rep));
                               }
                           });
}

void watchdog(RunEnv& env, RobotCtx& r, uint64_t epoch) {
    if (!r.frame_active || r.epoch != epoch) return;
    fill_goal_stages(env, r, r.cur_goal);  // record whatever stage the service reached
    finalize_frame(env, r, false);
}

void start_frame(RunEnv& env, RobotCtx& r) {
    if (r.next_k >= env.cfg.frames_per_robot) return;  // defensive; finalize marks done

    int64_t now = env.sched.now_ns();

    // Bytes since the last frame closed (handshakes, acks, stragglers) are
    // control traffic, not this frame's.
    uint64_t up = r.path->bytes_up(), down = r.path->bytes_down();
    env.traffic.setup_bytes_up += up - r.last_end_up;
    env.traffic.setup_bytes_down += down - r.last_end_down;
    r.base_up = up;
    r.base_down = down;

    int k = r.next_k++;
    r.cur_scene = scene_of(static_cast<uint64_t>(r.id), static_cast<uint64_t>(k), env.ds.count());
    r.cur_fid = frame_uid(static_cast<uint64_t>(r.id), static_cast<uint64_t>(k));
    r.cur_capture_ns = now;
    r.attempt = 0;
    r.retry_pending = false;
    r.frame_active = true;
    ++r.epoch;

    r.rec = metrics::ExperimentRecord{};
    r.rec.frame_id = r.cur_fid;
    r.rec.robot_id = static_cast<uint32_t>(r.id);
    r.rec.protocol = env.cfg.transport;
    r.rec.network = env.cfg.network;
    r.rec.model = env.cfg.model;
    r.rec.platform = env.cfg.platform;
    r.rec.t_capture = now;

    if (env.shape) {
        r.path->send_rgb(stub_envelope(Channel::Rgb, r.cur_fid, now, env.up_rgb_bytes));
        r.path->send_depth(stub_envelope(Channel::Depth, r.cur_fid, now, env.up_depth_bytes));
    } else {
        std::vector<uint8_t> rgb = env.rgb_wire[r.cur_scene];
        std::vector<uint8_t> depth = env.depth_wire[r.cur_scene];
        patch_envelope_ids(rgb, r.cur_fid, now);
        patch_envelope_ids(depth, r.cur_fid, now);
        r.path->send_rgb(std::move(rgb));
        r.path->send_depth(std::move(depth));
    }
    r.rec.t_sent = env.sched.now_ns();
    send_trigger(env, r);

    RobotCtx* rp = &r;
    uint64_t ep = r.epoch;
    env.sched.schedule_after(env.timeout_ns, [&env, rp, ep] { watchdog(env, *rp, ep); });
}

void finalize_frame(RunEnv& env, RobotCtx& r, bool success) {
    int64_t now = env.sched.now_ns();
    r.frame_active = false;
    ++r.epoch;

    uint64_t up = r.path->bytes_up(), down = r.path->bytes_down();
    r.rec.bytes_up = up - r.base_up;
    r.rec.bytes_down = down - r.base_down;
    r.last_end_up = up;
    r.last_end_down = down;

    env.records.push_back(r.rec);
    if (success)
        ++env.completed;
    else
        ++env.failed;

    if (r.next_k >= env.cfg.frames_per_robot) {
        r.done = true;
        ++env.robots_done;
        return;
    }
    int64_t next = std::max(now, r.cur_capture_ns + env.frame_interval_ns);
    RobotCtx* rp = &r;
    env.sched.schedule_at(next, [&env, rp] { start_frame(env, *rp); });
}

// ---------------------------------------------------------------------------
// MQTT wiring: one emulated link pair per robot carries everything between
// the robot and the broker; the broker and the edge service share a host and
// talk over a loopback that is excluded from network accounting.

class MqttPath final : public WirePath {
  public:
    MqttPath(RunEnv* env, int robot)
        : env_(env),
          robot_(robot),
          links_(std::make_unique<netem::LinkPair>(env->profile, &env->sched,
                                                   sim::derive_seed(env->cfg.seed, "link", static_cast<uint64_t>(robot)))),
          duplex_(std::make_unique<transport::SimDuplexPair>(*links_)) {
        std::string r = std::to_string(robot);
        t_rgb_ = "cam/" + r + "/rgb";
        t_depth_ = "cam/" + r + "/depth";
        t_req_ = "trig/" + r + "/req";
        t_rep_ = "trig/" + r + "/rep";

        env_->broker->bind(&duplex_->far);
        mqtt::ClientConfig cc;
        cc.client_id = "robot" + r;
        cli_ = std::make_unique<mqtt::MqttClient>(&duplex_->near, cc);
    }

    void send_rgb(std::vector<uint8_t> wire) override { cli_->publish(t_rgb_, std::move(wire), env_->qos); }
    void send_depth(std::vector<uint8_t> wire) override { cli_->publish(t_depth_, std::move(wire), env_->qos); }
    void send_trigger(std::vector<uint8_t> wire) override { cli_->publish(t_req_, std::move(wire), env_->qos); }
    void send_reply(std::vector<uint8_t> wire) override {
        env_->edge_cli->publish(t_rep_, std::move(wire), env_->qos);
    }

    void setup_kick() override {
        RunEnv* env = env_;
        int robot = robot_;
        if (!cli_->connected()) {
            cli_->connect();
            return;
        }
        if (!cli_->subscribed(t_rep_))
            cli_->subscribe(t_rep_, env->qos,
                            [env, robot](const std::string&, std::vector<uint8_t> payload, bool, int64_t now) {
                                on_robot_reply(*env, robot, payload, now);
                            });
        if (env->edge_cli->connected()) {
            if (!env->edge_cli->subscribed(t_rgb_))
                env->edge_cli->subscribe(t_rgb_, env->qos,
                                         [env, robot](const std::string&, std::vector<uint8_t> payload, bool, int64_t) {
                                             on_edge_frame(*env, robot, payload);
                                         });
            if (!env->edge_cli->subscribed(t_depth_))
                env->edge_cli->subscribe(t_depth_, env->qos,
                                         [env, robot](const std::string&, std::vector<uint8_t> payload, bool, int64_t) {
                                             on_edge_frame(*env, robot, payload);
                                         });
            if (!env->edge_cli->subscribed(t_req_))
                env->edge_cli->subscribe(t_req_, env->qos,
                                         [env, robot](const std::string&, std::vector<uint8_t> payload, bool, int64_t) {
                                             on_edge_trigger(*env, robot, payload);
                                         });
        }
    }

    bool setup_done() const override {
        return cli_->connected() && cli_->subscribed(t_rep_) && env_->edge_cli->connected() &&
               env_->edge_cli->subscribed(t_rgb_) && env_->edge_cli->subscribed(t_depth_) &&
               env_->edge_cli->subscribed(t_req_);
    }

    void tick(int64_t now_ns) override { cli_->tick(now_ns); }

    uint64_t bytes_up() const override { return links_->up.counters().bytes_sent; }
    uint64_t bytes_down() const override { return links_->down.counters().bytes_sent; }

  private:
    RunEnv* env_;
    int robot_;
    std::unique_ptr<netem::LinkPair> links_;
    std::unique_ptr<transport::SimDuplexPair> duplex_;
    std::unique_ptr<mqtt::MqttClient> cli_;
    std::string t_rgb_, t_depth_, t_req_, t_rep_;
};

// ---------------------------------------------------------------------------
// TCPROS wiring: one connection (own emulated link pair) per topic, four
// topics per robot, mirroring one-socket-per-topic transport.

class TcprosPath final : public WirePath {
  public:
    TcprosPath(RunEnv* env, int robot) : env_(env), robot_(robot) {
        std::string r = std::to_string(robot);
        // Robot publishes camera streams and trigger requests; edge publishes replies.
        rgb_ = make_wire(env, robot, "rgb", "/cam" + r + "/rgb", "e5sh/Frame", true);
        depth_ = make_wire(env, robot, "depth", "/cam" + r + "/depth", "e5sh/Frame", true);
        req_ = make_wire(env, robot, "req", "/trig" + r + "/req", "e5sh/TriggerRequest", true);
        rep_ = make_wire(env, robot, "rep", "/trig" + r + "/rep", "e5sh/TriggerReply", false);

        RunEnv* e = env;
        int rb = robot;
        rgb_.sub = std::make_unique<transport::TcprosSubscriber>(
            &rgb_.duplex->far, sub_cfg("/edge", rgb_.pub->config()),
            [e, rb](std::vector<uint8_t> payload, int64_t) { on_edge_frame(*e, rb, payload); });
        depth_.sub = std::make_unique<transport::TcprosSubscriber>(
            &depth_.duplex->far, sub_cfg("/edge", depth_.pub->config()),
            [e, rb](std::vector<uint8_t> payload, int64_t) { on_edge_frame(*e, rb, payload); });
        req_.sub = std::make_unique<transport::TcprosSubscriber>(
            &req_.duplex->far, sub_cfg("/edge", req_.pub->config()),
            [e, rb](std::vector<uint8_t> payload, int64_t) { on_edge_trigger(*e, rb, payload); });
        rep_.sub = std::make_unique<transport::TcprosSubscriber>(
            &rep_.duplex->far, sub_cfg("/robot" + r, rep_.pub->config()),
            [e, rb](std::vector<uint8_t> payload, int64_t now) { on_robot_reply(*e, rb, payload, now); });

        rgb_.conn = &rgb_.pub->accept(&rgb_.duplex->near);
        depth_.conn = &depth_.pub->accept(&depth_.duplex->near);
        req_.conn = &req_.pub->accept(&req_.duplex->near);
        rep_.conn = &rep_.pub->accept(&rep_.duplex->near);
    }

    void send_rgb(std::vector<uint8_t> wire) override { rgb_.pub->publish(wire); }
    void send_depth(std::vector<uint8_t> wire) override { depth_.pub->publish(wire); }
    void send_trigger(std::vector<uint8_t> wire) override { req_.pub->publish(wire); }
    void send_reply(std::vector<uint8_t> wire) override { rep_.pub->publish(wire); }

    void setup_kick() override {
        for (TopicWire* w : {&rgb_, &depth_, &req_, &rep_})
            if (w->sub->state() == transport::EndpointState::AwaitingHeader) w->sub->start();
    }

    bool setup_done() const override {
        for (const TopicWire* w : {&rgb_, &depth_, &req_, &rep_})
            if (w->sub->state() != transport::EndpointState::Active) return false;
        return true;
    }

    uint64_t bytes_up() const override {
        uint64_t b = 0;
        for (const TopicWire* w : {&rgb_, &depth_, &req_, &rep_}) b += w->sem_up->counters().bytes_sent;
        return b;
    }
    uint64_t bytes_down() const override {
        uint64_t b = 0;
        for (const TopicWire* w : {&rgb_, &depth_, &req_, &rep_}) b += w->sem_down->counters().bytes_sent;
        return b;
    }

  private:
    struct TopicWire {
        std::unique_ptr<netem::LinkPair> links;
        std::unique_ptr<transport::SimDuplexPair> duplex;
        netem::Link* sem_up = nullptr;    // carries robot -> edge
        netem::Link* sem_down = nullptr;  // carries edge -> robot
        std::unique_ptr<transport::TcprosPublisher> pub;
        transport::PublisherConnection* conn = nullptr;
        std::unique_ptr<transport::TcprosSubscriber> sub;
    };

    // robot_pub: the robot holds the publishing (near) end; otherwise the
    // edge publishes and the physical up/down links swap semantic roles.
    static TopicWire make_wire(RunEnv* env, int robot, const char* stream, std::string topic,
                               std::string type, bool robot_pub) {
        TopicWire w;
        uint64_t seed = sim::derive_seed(env->cfg.seed, std::string("link.") + stream,
                                         static_cast<uint64_t>(robot));
        w.links = std::make_unique<netem::LinkPair>(env->profile, &env->sched, seed);
        w.duplex = std::make_unique<transport::SimDuplexPair>(*w.links);
        w.sem_up = robot_pub ? &w.links->up : &w.links->down;
        w.sem_down = robot_pub ? &w.links->down : &w.links->up;
        transport::EndpointConfig pc;
        pc.callerid = robot_pub ? "/robot" + std::to_string(robot) : "/edge";
        pc.topic = std::move(topic);
        pc.type = std::move(type);
        w.pub = std::make_unique<transport::TcprosPublisher>(pc);
        return w;
    }

    static transport::EndpointConfig sub_cfg(std::string callerid, const transport::EndpointConfig& pub) {
        transport::EndpointConfig c;
        c.callerid = std::move(callerid);
        c.topic = pub.topic;
        c.type = pub.type;
        return c;
    }

    RunEnv* env_;
    int robot_;
    TopicWire rgb_, depth_, req_, rep_;
};

// ---------------------------------------------------------------------------

void supervise(RunEnv& env) {
    if (env.setup_complete) return;
    if (env.sched.now_ns() > kSetupDeadlineNs)
        throw std::runtime_error("experiment setup did not converge (connect/subscribe loss?)");

    if (env.edge_cli && !env.edge_cli->connected()) env.edge_cli->connect();

    bool all = true;
    for (auto& r : env.robots) {
        r->path->setup_kick();
        all = all && r->path->setup_done();
    }
    if (all) {
        env.setup_complete = true;
        for (auto& r : env.robots) {
            RobotCtx* rp = r.get();
            env.sched.schedule_after(0, [&env, rp] { start_frame(env, *rp); });
        }
        return;
    }
    env.sched.schedule_after(kSetupPollNs, [&env] { supervise(env); });
}

void tick_clients(RunEnv& env) {
    if (env.finished()) return;
    int64_t now = env.sched.now_ns();
    if (env.edge_cli) env.edge_cli->tick(now);
    for (auto& r : env.robots) r->path->tick(now);
    env.sched.schedule_after(kClientTickNs, [&env] { tick_clients(env); });
}

std::unique_ptr<perception::SegmentationBackend> make_backend(const ExperimentConfig& cfg,
                                                              const Dataset& ds) {
    std::unique_ptr<perception::SegmentationBackend> inner;
    if (cfg.backend == "oracle") {
        const Dataset* dp = &ds;
        inner = std::make_unique<perception::OracleBackend>(
            [dp](uint64_t fid) -> std::optional<LabeledMask> {
                if (fid == 0) return std::nullopt;
                size_t idx = scene_of(robot_of_uid(fid), index_of_uid(fid), dp->count());
                return dp->scenes[idx].truth;
            });
    } else {
        inner = std::make_unique<perception::HeuristicBackend>();
    }
    if (cfg.model == "none") return inner;
    return std::make_unique<perception::DelayedBackend>(std::move(inner), perception::LatencyModel::defaults(),
                                                        cfg.model, cfg.platform,
                                                        sim::derive_seed(cfg.seed, "latency"));
}

}  // namespace

RunResult run_experiment_sim(const ExperimentConfig& cfg, const std::string& dataset_dir) {
    cfg.validate();
    if (cfg.mode != "sim") throw std::invalid_argument("run: config is not a sim-mode config");
    if (static_cast<uint64_t>(cfg.frames_per_robot) >= kFrameIndexCap)
        throw std::invalid_argument("run: frames_per_robot exceeds the frame id space");

    RunEnv env(cfg, load_dataset(dataset_dir));
    env.profile = cfg.effective_profile();
    env.shape = cfg.pad_up_bytes > 0 || cfg.pad_down_bytes > 0;
    env.is_mqtt = cfg.transport != "tcpros";
    env.qos = (cfg.transport == "mqtt-qos1") ? 1 : 0;
    env.frame_interval_ns = static_cast<int64_t>(1e9 / cfg.camera_fps);
    env.timeout_ns = static_cast<int64_t>(cfg.frame_timeout_s * 1e9);
    if (env.shape) {
        env.up_depth_bytes = std::max<size_t>(kEnvelopeHeaderSize + 1, cfg.pad_up_bytes / 4);
        env.up_rgb_bytes = cfg.pad_up_bytes - 8 - env.up_depth_bytes;
    }

    env.backend = make_backend(cfg, env.ds);
    perception::ActionServerConfig sc;
    sc.workers = cfg.workers;
    sc.intrinsics = env.ds.intrinsics;
    env.server = std::make_unique<perception::ActionServer>(&env.sched, env.backend.get(), sc);

    if (!env.shape) {
        env.rgb_wire.reserve(env.ds.count());
        env.depth_wire.reserve(env.ds.count());
        for (const Scene& s : env.ds.scenes) {
            env.rgb_wire.push_back(encode_frame(s.frame, Channel::Rgb));
            env.depth_wire.push_back(encode_frame(s.frame, Channel::Depth));
        }
    }

    if (env.is_mqtt) {
        env.broker = std::make_unique<mqtt::SimBroker>(&env.sched);
        env.edge_end = std::make_unique<LoopbackDuplex>(&env.sched);
        env.broker_end = std::make_unique<LoopbackDuplex>(&env.sched);
        env.edge_end->link_peer(env.broker_end.get());
        env.broker_end->link_peer(env.edge_end.get());
        env.broker->bind(env.broker_end.get());
        mqtt::ClientConfig cc;
        cc.client_id = "edge";
        env.edge_cli = std::make_unique<mqtt::MqttClient>(env.edge_end.get(), cc);
        env.broker->start_ticking();
    }

    env.robots.reserve(static_cast<size_t>(cfg.robots));
    for (int i = 0; i < cfg.robots; ++i) {
        auto r = std::make_unique<RobotCtx>();
        r->id = i;
        if (env.is_mqtt)
            r->path = std::make_unique<MqttPath>(&env, i);
        else
            r->path = std::make_unique<TcprosPath>(&env, i);
        env.robots.push_back(std::move(r));
    }

    env.sched.schedule_at(0, [&env] { supervise(env); });
    if (env.is_mqtt) env.sched.schedule_at(0, [&env] { tick_clients(env); });

    while (!env.finished()) {
        std::optional<int64_t> due = env.sched.next_due();
        if (!due) break;  // starved: watchdogs should make this unreachable
        env.sched.advance(*due);
    }
    if (env.broker) env.broker->stop_ticking();

    RunResult out;
    out.records = std::move(env.records);
    out.traffic = env.traffic;
    for (auto& r : env.robots) {
        uint64_t up = r->path->bytes_up(), down = r->path->bytes_down();
        out.traffic.link_bytes_up += up;
        out.traffic.link_bytes_down += down;
        out.traffic.setup_bytes_up += up - r->last_end_up;
        out.traffic.setup_bytes_down += down - r->last_end_down;
    }
    out.frames_completed = env.completed;
    out.frames_failed = env.failed;
    out.virtual_end_ns = env.sched.now_ns();
    out.oracle_mask_mismatches = env.mask_mismatches;
    out.trigger_retries = env.trigger_retries;
    return out;
}

}  // namespace e5sh::harness
