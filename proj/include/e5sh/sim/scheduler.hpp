#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <queue>
#include <vector>

namespace e5sh::sim {

// Deterministic virtual-time executor. Events fire in (due_ns, submission
// sequence) order; the clock never moves backward. Identical seeds plus
// identical event submissions produce identical traces.
class EventScheduler {
public:
    using EventFn = std::function<void()>;

    int64_t now_ns() const { return now_ns_; }

    void schedule_at(int64_t due_ns, EventFn fn) {
        if (due_ns < now_ns_) due_ns = now_ns_;
        queue_.push(Entry{due_ns, next_seq_++, std::move(fn)});
    }

    void schedule_after(int64_t delay_ns, EventFn fn) {
        schedule_at(now_ns_ + (delay_ns < 0 ? 0 : delay_ns), std::move(fn));
    }

    // Fires every event with due <= until; the clock ends at `until` even if
    // the queue drains early. Returns the number of events fired.
    size_t advance(int64_t until_ns) {
        size_t fired = 0;
        while (!queue_.empty() && queue_.top().due_ns <= until_ns) {
            Entry e = queue_.top();
            queue_.pop();
            now_ns_ = e.due_ns;
            e.fn();
            ++fired;
        }
        if (until_ns > now_ns_) now_ns_ = until_ns;
        return fired;
    }

    // Runs until the queue drains or the clock would pass `limit_ns`.
    size_t run(int64_t limit_ns) {
        size_t fired = 0;
        while (!queue_.empty() && queue_.top().due_ns <= limit_ns) {
            Entry e = queue_.top();
            queue_.pop();
            now_ns_ = e.due_ns;
            e.fn();
            ++fired;
        }
        return fired;
    }

    bool empty() const { return queue_.empty(); }
    size_t pending() const { return queue_.size(); }

    std::optional<int64_t> next_due() const {
        if (queue_.empty()) return std::nullopt;
        return queue_.top().due_ns;
    }

private:
    struct Entry {
        int64_t due_ns;
        uint64_t seq;
        EventFn fn;
    };
    struct Later {
        bool operator()(const Entry& a, const Entry& b) const {
            if (a.due_ns != b.due_ns) return a.due_ns > b.due_ns;
            return a.seq > b.seq;
        }
    };

    std::priority_queue<Entry, std::vector<Entry>, Later> queue_;
    int64_t now_ns_ = 0;
    uint64_t next_seq_ = 0;
};

// Time source shared by sim and live code paths. A virtual clock only
// advances via its scheduler; reads between events are constant.
class Clock {
public:
    enum class Mode { Wall, Virtual };

    static Clock wall();
    static Clock virt(const EventScheduler* sched) { return Clock(sched); }

    Mode mode() const { return sched_ ? Mode::Virtual : Mode::Wall; }
    int64_t now_ns() const;

private:
    Clock() = default;
    explicit Clock(const EventScheduler* sched) : sched_(sched) {}
    const EventScheduler* sched_ = nullptr;
};

}  // namespace e5sh::sim
