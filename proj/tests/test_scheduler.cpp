#include <vector>

#include "doctest.h"
#include "e5sh/sim/scheduler.hpp"

using namespace e5sh::sim;

TEST_CASE("events fire in due order with insertion-order tiebreak") {
    EventScheduler s;
    std::vector<int> order;
    s.schedule_at(50, [&] { order.push_back(3); });
    s.schedule_at(10, [&] { order.push_back(1); });
    s.schedule_at(10, [&] { order.push_back(2); });  // same due, inserted later
    s.advance(100);
    CHECK(order == std::vector<int>{1, 2, 3});
    CHECK(s.now_ns() == 100);
    CHECK(s.empty());
}

TEST_CASE("advance stops the clock exactly at the target") {
    EventScheduler s;
    int fired = 0;
    s.schedule_at(10, [&] { ++fired; });
    s.schedule_at(20, [&] { ++fired; });
    CHECK(s.advance(15) == 1);
    CHECK(s.now_ns() == 15);
    CHECK(fired == 1);
    CHECK(s.pending() == 1);
    CHECK(s.next_due() == 20);
    CHECK(s.advance(20) == 1);
    CHECK(s.now_ns() == 20);
}

TEST_CASE("past-due scheduling clamps to now") {
    EventScheduler s;
    s.advance(100);
    bool ran = false;
    s.schedule_at(5, [&] { ran = true; });
    CHECK(s.next_due() == 100);
    s.advance(100);
    CHECK(ran);
    CHECK(s.now_ns() == 100);
}

TEST_CASE("events scheduled during execution run in the same pass when due") {
    EventScheduler s;
    std::vector<int> order;
    s.schedule_at(10, [&] {
        order.push_back(1);
        s.schedule_after(5, [&] { order.push_back(2); });
        s.schedule_after(0, [&] { order.push_back(3); });  // due now, after queued peers
    });
    s.advance(100);
    CHECK(order == std::vector<int>{1, 3, 2});
}

TEST_CASE("run() fires everything due within the limit and leaves the rest") {
    EventScheduler s;
    int fired = 0;
    for (int i = 1; i <= 5; ++i) s.schedule_at(i * 10, [&] { ++fired; });
    CHECK(s.run(30) == 3);
    CHECK(fired == 3);
    CHECK(s.now_ns() == 30);
    CHECK(s.pending() == 2);
}

TEST_CASE("identical submissions produce identical traces") {
    auto trace = [] {
        EventScheduler s;
        std::vector<std::pair<int64_t, int>> out;
        for (int i = 0; i < 100; ++i) {
            int64_t due = (i * 7919) % 1000;
            s.schedule_at(due, [&out, i, &s] { out.emplace_back(s.now_ns(), i); });
        }
        s.advance(1000);
        return out;
    };
    CHECK(trace() == trace());
}

TEST_CASE("virtual clock reads scheduler time; wall clock advances on its own") {
    EventScheduler s;
    Clock vc = Clock::virt(&s);
    CHECK(vc.now_ns() == 0);
    s.advance(123456);
    CHECK(vc.now_ns() == 123456);

    Clock wc = Clock::wall();
    int64_t a = wc.now_ns();
    int64_t b = wc.now_ns();
    CHECK(b >= a);
}
