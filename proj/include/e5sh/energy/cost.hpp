#pragma once

#include <optional>
#include <string>

namespace e5sh::energy {

// Capital cost comparison between one shared server (base chassis plus one
// GPU per `robots_per_gpu` robots) and one embedded board per robot.
struct CostModel {
    double server_base = 2000.0;
    double gpu_unit = 250.0;
    int robots_per_gpu = 3;
    double njxn_unit = 300.0;

    // Throws std::invalid_argument unless every field is positive.
    void validate() const;

    static CostModel from_json_text(const std::string& text);
    std::string to_json_text() const;
};

// server_base + ceil(n / robots_per_gpu) * gpu_unit. Requires n >= 1.
double server_cost(const CostModel& c, int n);

// n * njxn_unit. Requires n >= 1.
double embedded_cost(const CostModel& c, int n);

// Smallest n in [1, 1000] where the shared server is no more expensive than
// n embedded boards, or nullopt if that never happens in range.
std::optional<int> break_even(const CostModel& c);

}  // namespace e5sh::energy
