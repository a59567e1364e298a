#pragma once

namespace e5sh::metrics {

// Stream throughput in kilobytes/second for a frame rate and per-frame size.
double throughput_kbps(double fps, double frame_bytes);

// End-to-end frame rate when each frame pays a segmentation time plus a
// fixed per-frame overhead (both in seconds). t_seg must be positive,
// t_overhead non-negative.
double cumulative_fps(double t_seg_s, double t_overhead_s);

// Ratio of two frame rates; fps_b must be positive.
double speedup(double fps_a, double fps_b);

// Total picking time: perception cycles at a fixed per-cycle cost plus the
// motion time that does not depend on perception.
double picking_cycle_estimate(int perception_cycles, double per_cycle_s, double fixed_motion_s);

}  // namespace e5sh::metrics
