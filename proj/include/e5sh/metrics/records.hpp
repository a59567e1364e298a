#pragma once

#include <cstdint>
#include <mutex>
#include <string>
#include <vector>

namespace e5sh::metrics {

// One frame's journey through the pipeline. Timestamps are virtual-time
// nanoseconds; -1 marks a stage the frame never reached.
struct ExperimentRecord {
    uint64_t frame_id = 0;
    uint32_t robot_id = 0;
    std::string protocol;
    std::string network;
    std::string model;
    std::string platform;
    int64_t t_capture = -1;
    int64_t t_sent = -1;
    int64_t t_goal = -1;
    int64_t t_seg_start = -1;
    int64_t t_seg_end = -1;
    int64_t t_result = -1;
    int64_t t_map_done = -1;
    uint64_t bytes_up = 0;
    uint64_t bytes_down = 0;

    // All stages reached.
    bool complete() const;
    // Present timestamps are non-decreasing in pipeline order (a record with
    // gaps is checked over the stages it did reach).
    bool ordered() const;
};

inline constexpr const char* kRecordCsvHeader =
    "frame_id,robot_id,protocol,network,model,platform,t_capture,t_sent,t_goal,"
    "t_seg_start,t_seg_end,t_result,t_map_done,bytes_up,bytes_down";

// Serializes records sorted by (t_result, robot_id, frame_id) under the
// header above, one line per record, '\n' terminated. Label fields must not
// contain commas, quotes, or line breaks. Throws std::invalid_argument on a
// label that cannot be represented.
std::string records_to_csv(std::vector<ExperimentRecord> records);

// Parses what records_to_csv produces. Throws std::invalid_argument on a
// missing/incorrect header, wrong field count, or a malformed number.
std::vector<ExperimentRecord> records_from_csv(const std::string& csv);

// Append-only record sink shared by concurrent producers; statistics are
// computed from immutable snapshots.
class RecordLog {
  public:
    void append(ExperimentRecord record);
    std::vector<ExperimentRecord> snapshot() const;
    size_t size() const;

  private:
    mutable std::mutex mutex_;
    std::vector<ExperimentRecord> records_;
};

}  // namespace e5sh::metrics
