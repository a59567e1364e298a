#include "e5sh/energy/cost.hpp"

#include <stdexcept>

#include <json.hpp>

namespace e5sh::energy {

using nlohmann::json;

void CostModel::validate() const {
    if (server_base <= 0) throw std::invalid_argument("cost model: server_base must be positive");
    if (gpu_unit <= 0) throw std::invalid_argument("cost model: gpu_unit must be positive");
    if (robots_per_gpu <= 0)
        throw std::invalid_argument("cost model: robots_per_gpu must be positive");
    if (njxn_unit <= 0) throw std::invalid_argument("cost model: njxn_unit must be positive");
}

double server_cost(const CostModel& c, int n) {
    c.validate();
    if (n < 1) throw std::invalid_argument("server_cost: robot count must be >= 1");
    int gpus = (n + c.robots_per_gpu - 1) / c.robots_per_gpu;
    return c.server_base + static_cast<double>(gpus) * c.gpu_unit;
}

double embedded_cost(const CostModel& c, int n) {
    c.validate();
    if (n < 1) throw std::invalid_argument("embedded_cost: robot count must be >= 1");
    return static_cast<double>(n) * c.njxn_unit;
}

std::optional<int> break_even(const CostModel& c) {
    c.validate();
    for (int n = 1; n <= 1000; ++n)
        if (server_cost(c, n) <= embedded_cost(c, n)) return n;
    return std::nullopt;
}

CostModel CostModel::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("cost model: bad JSON: ") + e.what());
    }
    CostModel c;
    try {
        if (j.contains("server_base")) c.server_base = j["server_base"].get<double>();
        if (j.contains("gpu_unit")) c.gpu_unit = j["gpu_unit"].get<double>();
        if (j.contains("robots_per_gpu")) c.robots_per_gpu = j["robots_per_gpu"].get<int>();
        if (j.contains("njxn_unit")) c.njxn_unit = j["njxn_unit"].get<double>();
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("cost model: bad JSON shape: ") + e.what());
    }
    c.validate();
    return c;
}

std::string CostModel::to_json_text() const {
    validate();
    json j;
    j["server_base"] = server_base;
    j["gpu_unit"] = gpu_unit;
    j["robots_per_gpu"] = robots_per_gpu;
    j["njxn_unit"] = njxn_unit;
    return j.dump(2);
}

}  // namespace e5sh::energy
