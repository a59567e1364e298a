#include "e5sh/metrics/perf.hpp"

#include <stdexcept>

namespace e5sh::metrics {

double throughput_kbps(double fps, double frame_bytes) {
    if (fps < 0.0 || frame_bytes < 0.0)
        throw std::invalid_argument("throughput_kbps: negative argument");
    return fps * frame_bytes / 1000.0;
}

double cumulative_fps(double t_seg_s, double t_overhead_s) {
    if (t_seg_s <= 0.0) throw std::invalid_argument("cumulative_fps: segmentation time must be positive");
    if (t_overhead_s < 0.0) throw std::invalid_argument("cumulative_fps: negative overhead");
    return 1.0 / (t_seg_s + t_overhead_s);
}

double speedup(double fps_a, double fps_b) {
    if (fps_b <= 0.0) throw std::invalid_argument("speedup: reference rate must be positive");
    return fps_a / fps_b;
}

double picking_cycle_estimate(int perception_cycles, double per_cycle_s, double fixed_motion_s) {
    if (perception_cycles < 0 || per_cycle_s < 0.0 || fixed_motion_s < 0.0)
        throw std::invalid_argument("picking_cycle_estimate: negative argument");
    return perception_cycles * per_cycle_s + fixed_motion_s;
}

}  // namespace e5sh::metrics
