#include "e5sh/metrics/records.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <stdexcept>
#include <string_view>
#include <tuple>

namespace e5sh::metrics {

namespace {

std::array<int64_t, 7> stage_times(const ExperimentRecord& r) {
    return {r.t_capture, r.t_sent, r.t_goal, r.t_seg_start, r.t_seg_end, r.t_result, r.t_map_done};
}

void check_label(const std::string& s, const char* field) {
    for (char c : s)
        if (c == ',' || c == '"' || c == '\n' || c == '\r')
            throw std::invalid_argument(std::string("records_to_csv: ") + field +
                                        " contains a character CSV labels cannot carry");
}

template <typename T>
T parse_number(std::string_view token, const char* field) {
    T value{};
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size())
        throw std::invalid_argument(std::string("records_from_csv: malformed ") + field + " '" +
                                    std::string(token) + "'");
    return value;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    size_t start = 0;
    while (true) {
        size_t pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

}  // namespace

bool ExperimentRecord::complete() const {
    for (int64_t t : stage_times(*this))
        if (t < 0) return false;
    return true;
}

bool ExperimentRecord::ordered() const {
    int64_t prev = -1;
    for (int64_t t : stage_times(*this)) {
        if (t < 0) continue;  // stage not reached
        if (prev >= 0 && t < prev) return false;
        prev = t;
    }
    return true;
}

std::string records_to_csv(std::vector<ExperimentRecord> records) {
    for (const auto& r : records) {
        check_label(r.protocol, "protocol");
        check_label(r.network, "network");
        check_label(r.model, "model");
        check_label(r.platform, "platform");
    }
    std::sort(records.begin(), records.end(), [](const ExperimentRecord& x, const ExperimentRecord& y) {
        return std::tie(x.t_result, x.robot_id, x.frame_id) <
               std::tie(y.t_result, y.robot_id, y.frame_id);
    });
    std::string out = kRecordCsvHeader;
    out += '\n';
    for (const auto& r : records) {
        out += std::to_string(r.frame_id);
        out += ',';
        out += std::to_string(r.robot_id);
        out += ',';
        out += r.protocol;
        out += ',';
        out += r.network;
        out += ',';
        out += r.model;
        out += ',';
        out += r.platform;
        for (int64_t t : stage_times(r)) {
            out += ',';
            out += std::to_string(t);
        }
        out += ',';
        out += std::to_string(r.bytes_up);
        out += ',';
        out += std::to_string(r.bytes_down);
        out += '\n';
    }
    return out;
}

std::vector<ExperimentRecord> records_from_csv(const std::string& csv) {
    std::vector<std::string_view> lines = split(csv, '\n');
    if (!lines.empty() && lines.back().empty()) lines.pop_back();
    if (lines.empty() || lines.front() != kRecordCsvHeader)
        throw std::invalid_argument("records_from_csv: missing or unexpected header");

    std::vector<ExperimentRecord> out;
    for (size_t li = 1; li < lines.size(); ++li) {
        std::vector<std::string_view> f = split(lines[li], ',');
        if (f.size() != 15)
            throw std::invalid_argument("records_from_csv: line " + std::to_string(li + 1) +
                                        " has " + std::to_string(f.size()) + " fields, expected 15");
        ExperimentRecord r;
        r.frame_id = parse_number<uint64_t>(f[0], "frame_id");
        r.robot_id = parse_number<uint32_t>(f[1], "robot_id");
        r.protocol = std::string(f[2]);
        r.network = std::string(f[3]);
        r.model = std::string(f[4]);
        r.platform = std::string(f[5]);
        r.t_capture = parse_number<int64_t>(f[6], "t_capture");
        r.t_sent = parse_number<int64_t>(f[7], "t_sent");
        r.t_goal = parse_number<int64_t>(f[8], "t_goal");
        r.t_seg_start = parse_number<int64_t>(f[9], "t_seg_start");
        r.t_seg_end = parse_number<int64_t>(f[10], "t_seg_end");
        r.t_result = parse_number<int64_t>(f[11], "t_result");
        r.t_map_done = parse_number<int64_t>(f[12], "t_map_done");
        r.bytes_up = parse_number<uint64_t>(f[13], "bytes_up");
        r.bytes_down = parse_number<uint64_t>(f[14], "bytes_down");
        out.push_back(std::move(r));
    }
    return out;
}

void RecordLog::append(ExperimentRecord record) {
    std::lock_guard lock(mutex_);
    records_.push_back(std::move(record));
}

std::vector<ExperimentRecord> RecordLog::snapshot() const {
    std::lock_guard lock(mutex_);
    return records_;
}

size_t RecordLog::size() const {
    std::lock_guard lock(mutex_);
    return records_.size();
}

}  // namespace e5sh::metrics
