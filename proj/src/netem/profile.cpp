#include "e5sh/netem/profile.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace e5sh::netem {

using nlohmann::json;

double DelaySpec::sample_ms(std::mt19937_64& rng) const {
    switch (kind) {
        case Kind::Constant:
            return a;
        case Kind::Normal: {
            std::normal_distribution<double> d(a, b);
            return std::max(0.0, d(rng));
        }
        case Kind::LogNormal: {
            std::lognormal_distribution<double> d(a, b);
            return d(rng);
        }
    }
    return a;
}

void NetworkProfile::validate() const {
    if (loss_prob < 0.0 || loss_prob > 1.0) throw std::invalid_argument("profile: loss_prob outside [0,1]");
    if (bandwidth_kbps && *bandwidth_kbps <= 0) throw std::invalid_argument("profile: bandwidth must be positive");
    if (delay.kind == DelaySpec::Kind::Constant && delay.a < 0)
        throw std::invalid_argument("profile: constant delay must be >= 0");
    if (delay.kind == DelaySpec::Kind::Normal && delay.b < 0)
        throw std::invalid_argument("profile: normal std must be >= 0");
}

bool NetworkProfile::is_builtin(const std::string& name) {
    return name == "ideal" || name == "5g" || name == "wifi";
}

NetworkProfile NetworkProfile::builtin(const std::string& name) {
    NetworkProfile p;
    p.name = name;
    if (name == "ideal") {
        p.delay = {DelaySpec::Kind::Constant, 0.0, 0.0};
        p.loss_prob = 0.0;
    } else if (name == "5g") {
        p.delay = {DelaySpec::Kind::Normal, 4.0, 1.0};
        p.loss_prob = 0.001;
        p.metadata = {
            {"band", "N77 3800MHz-4100MHz"},
            {"carrier_bandwidth", "100MHz"},
            {"modulation", "256(DL)/64(UL) QAM"},
            {"transmit_power", "5W per Tx path (4Tx paths)"},
            {"mimo_layers", "4x2 closed-loop MIMO"},
            {"tdd_ul_dl_ratio", "3/7"},
        };
    } else if (name == "wifi") {
        // median ~8 ms one way with a heavy right tail
        p.delay = {DelaySpec::Kind::LogNormal, std::log(8.0), 0.8};
        p.loss_prob = 0.01;
    } else {
        throw std::invalid_argument("unknown builtin profile: " + name);
    }
    return p;
}

NetworkProfile NetworkProfile::from_json_text(const std::string& text) {
    json j = json::parse(text);
    NetworkProfile p;
    p.name = j.at("name").get<std::string>();
    const auto& d = j.at("delay");
    std::string kind = d.at("kind").get<std::string>();
    auto params = d.at("params").get<std::vector<double>>();
    if (kind == "constant") {
        if (params.size() != 1) throw std::invalid_argument("constant delay takes 1 param");
        p.delay = {DelaySpec::Kind::Constant, params[0], 0.0};
    } else if (kind == "normal") {
        if (params.size() != 2) throw std::invalid_argument("normal delay takes 2 params");
        p.delay = {DelaySpec::Kind::Normal, params[0], params[1]};
    } else if (kind == "lognormal") {
        if (params.size() != 2) throw std::invalid_argument("lognormal delay takes 2 params");
        p.delay = {DelaySpec::Kind::LogNormal, params[0], params[1]};
    } else {
        throw std::invalid_argument("unknown delay kind: " + kind);
    }
    if (j.contains("bandwidth_kbps") && !j["bandwidth_kbps"].is_null())
        p.bandwidth_kbps = j["bandwidth_kbps"].get<double>();
    p.loss_prob = j.value("loss", 0.0);
    p.seed = j.value("seed", uint64_t{0});
    if (j.contains("metadata"))
        for (auto& [k, v] : j["metadata"].items()) p.metadata[k] = v.get<std::string>();
    p.validate();
    return p;
}

NetworkProfile NetworkProfile::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open profile file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

std::string NetworkProfile::to_json_text() const {
    json d;
    switch (delay.kind) {
        case DelaySpec::Kind::Constant: d = {{"kind", "constant"}, {"params", {delay.a}}}; break;
        case DelaySpec::Kind::Normal: d = {{"kind", "normal"}, {"params", {delay.a, delay.b}}}; break;
        case DelaySpec::Kind::LogNormal: d = {{"kind", "lognormal"}, {"params", {delay.a, delay.b}}}; break;
    }
    json j = {{"name", name}, {"delay", d}, {"loss", loss_prob}, {"seed", seed}};
    if (bandwidth_kbps)
        j["bandwidth_kbps"] = *bandwidth_kbps;
    else
        j["bandwidth_kbps"] = nullptr;
    json m = json::object();
    for (auto& [k, v] : metadata) m[k] = v;
    j["metadata"] = m;
    return j.dump(2);
}

}  // namespace e5sh::netem
