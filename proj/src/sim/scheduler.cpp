#include "e5sh/sim/scheduler.hpp"

#include <chrono>

namespace e5sh::sim {

Clock Clock::wall() { return Clock(); }

int64_t Clock::now_ns() const {
    if (sched_) return sched_->now_ns();
    auto t = std::chrono::steady_clock::now().time_since_epoch();
    return std::chrono::duration_cast<std::chrono::nanoseconds>(t).count();
}

}  // namespace e5sh::sim
