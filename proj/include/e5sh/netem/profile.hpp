#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>

namespace e5sh::netem {

// One-way delay model. Parameters are milliseconds (LogNormal: mu/sigma of
// ln-ms). Sampled delays are floored at 0.
struct DelaySpec {
    enum class Kind { Constant, Normal, LogNormal };
    Kind kind = Kind::Constant;
    double a = 0;  // Constant: ms | Normal: mean ms | LogNormal: mu of ln-ms
    double b = 0;  // Normal: std ms | LogNormal: sigma of ln-ms

    double sample_ms(std::mt19937_64& rng) const;
};

struct NetworkProfile {
    std::string name;
    DelaySpec delay;
    std::optional<double> bandwidth_kbps;  // kilobytes/second; nullopt = unlimited
    double loss_prob = 0;
    uint64_t seed = 0;
    std::map<std::string, std::string> metadata;

    void validate() const;

    // Built-in profiles: "ideal", "5g", "wifi". The 5g/wifi parameters are
    // configuration defaults chosen for qualitative ordering (5G lower and
    // more consistent than WiFi), not measured ground truth.
    static NetworkProfile builtin(const std::string& name);
    static bool is_builtin(const std::string& name);

    static NetworkProfile from_json_text(const std::string& text);
    static NetworkProfile load_file(const std::string& path);
    std::string to_json_text() const;
};

}  // namespace e5sh::netem
