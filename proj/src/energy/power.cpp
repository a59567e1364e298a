#include "e5sh/energy/power.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace e5sh::energy {

using nlohmann::json;

void PowerModel::validate() const {
    if (platform != "edge" && platform != "njxn")
        throw std::invalid_argument("power model: unknown platform '" + platform + "'");
    if (model != "detectron2" && model != "d2go")
        throw std::invalid_argument("power model: unknown model '" + model + "'");
    if (anchors.empty()) throw std::invalid_argument("power model: no anchors");
    if (anchors.front().robots < 1.0)
        throw std::invalid_argument("power model: anchors must start at >= 1 robot");
    for (size_t i = 0; i < anchors.size(); ++i) {
        if (anchors[i].watts < 0)
            throw std::invalid_argument("power model: negative watts anchor");
        if (i == 0) continue;
        if (anchors[i].robots <= anchors[i - 1].robots)
            throw std::invalid_argument("power model: anchor robot counts must strictly increase");
        if (anchors[i].watts < anchors[i - 1].watts)
            throw std::invalid_argument("power model: anchor watts must not decrease");
    }
    if (emission_factor <= 0)
        throw std::invalid_argument("power model: emission factor must be positive");
    for (const auto& r : observed)
        if (r.watts < 0 || r.observed_mg <= 0)
            throw std::invalid_argument("power model: bad observed emission reading");
}

namespace {

// All built-in models share the factor fitted to the single-process
// edge reading (33.6 W at 98 mg): the grid intensity behind the readings is
// one constant, not a property of the device.
constexpr double kDefaultEmissionFactor = 98.0 / 33.6;

}  // namespace

PowerModel default_power_model(const std::string& platform, const std::string& model) {
    PowerModel m;
    m.platform = platform;
    m.model = model;
    m.emission_factor = kDefaultEmissionFactor;
    if (platform == "edge" && model == "detectron2") {
        m.anchors = {{1, 33.6}, {2, 48.3}, {3, 59.7}, {12, 240.0}};
        m.observed = {{33.6, 98.0}, {48.3, 128.0}, {59.7, 155.0}, {240.0, 620.0}};
    } else if (platform == "edge" && model == "d2go") {
        const double scale = 200.0 / 240.0;
        m.anchors = {{1, 33.6 * scale}, {2, 48.3 * scale}, {3, 59.7 * scale}, {12, 200.0}};
        m.observed = {{200.0, 500.0}};
    } else if (platform == "njxn" && model == "detectron2") {
        // Twelve standalone boards total 110 W; each board draws the same.
        m.anchors = {{1, 110.0 / 12.0}, {12, 110.0}};
        m.observed = {{110.0, 300.0}};
    } else if (platform == "njxn" && model == "d2go") {
        m.anchors = {{1, 95.0 / 12.0}, {12, 95.0}};
        m.observed = {{95.0, 240.0}};
    } else {
        throw std::invalid_argument("power model: no default for " + platform + "/" + model);
    }
    m.validate();
    return m;
}

double power_at(const PowerModel& m, double n) {
    m.validate();
    if (n < 1.0) throw std::invalid_argument("power_at: robot count must be >= 1");
    const auto& a = m.anchors;
    // Anchor hits must return the recorded reading bit-for-bit, not a
    // reconstruction of it through interpolation arithmetic.
    for (const auto& p : a)
        if (p.robots == n) return p.watts;
    if (a.size() == 1) return a.front().watts;

    // Pick the segment whose span covers n; reuse the outermost segment's
    // slope beyond either end.
    size_t hi = 1;
    while (hi + 1 < a.size() && a[hi].robots < n) ++hi;
    const PowerAnchor& p0 = a[hi - 1];
    const PowerAnchor& p1 = a[hi];
    double t = (n - p0.robots) / (p1.robots - p0.robots);
    return p0.watts + t * (p1.watts - p0.watts);
}

double emission_mg(const PowerModel& m, double watts) {
    m.validate();
    if (watts < 0) throw std::invalid_argument("emission_mg: watts must be >= 0");
    return watts * m.emission_factor;
}

std::vector<EmissionResidual> emission_residuals(const PowerModel& m) {
    m.validate();
    std::vector<EmissionResidual> out;
    out.reserve(m.observed.size());
    for (const auto& r : m.observed) {
        EmissionResidual e;
        e.watts = r.watts;
        e.observed_mg = r.observed_mg;
        e.fitted_mg = r.watts * m.emission_factor;
        e.relative_error = std::abs(e.fitted_mg - e.observed_mg) / e.observed_mg;
        out.push_back(e);
    }
    return out;
}

double max_emission_residual(const PowerModel& m) {
    double worst = 0;
    for (const auto& e : emission_residuals(m)) worst = std::max(worst, e.relative_error);
    return worst;
}

double consumption_ratio(const PowerModel& server, const PowerModel& board, double n) {
    if (n < 1.0) throw std::invalid_argument("consumption_ratio: robot count must be >= 1");
    double per_board = power_at(board, 1.0);
    if (per_board <= 0) throw std::invalid_argument("consumption_ratio: board draws no power");
    return power_at(server, n) / (n * per_board);
}

double consumption_ratio(const std::string& model, double n) {
    return consumption_ratio(default_power_model("edge", model),
                             default_power_model("njxn", model), n);
}

std::vector<EnergyRow> energy_table(const std::string& model, int max_robots) {
    if (max_robots < 1) throw std::invalid_argument("energy_table: need at least one robot");
    PowerModel edge = default_power_model("edge", model);
    PowerModel board = default_power_model("njxn", model);
    double per_board = power_at(board, 1.0);
    std::vector<EnergyRow> rows;
    rows.reserve(static_cast<size_t>(max_robots));
    for (int n = 1; n <= max_robots; ++n) {
        EnergyRow r;
        r.robots = n;
        r.edge_watts = power_at(edge, n);
        r.edge_mg = emission_mg(edge, r.edge_watts);
        r.board_watts = n * per_board;
        r.board_mg = emission_mg(board, r.board_watts);
        r.ratio = r.edge_watts / r.board_watts;
        rows.push_back(r);
    }
    return rows;
}

PowerModel PowerModel::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("power model: bad JSON: ") + e.what());
    }
    PowerModel m;
    try {
        m.platform = j.at("platform").get<std::string>();
        m.model = j.at("model").get<std::string>();
        for (const auto& pair : j.at("anchors")) {
            if (!pair.is_array() || pair.size() != 2)
                throw std::invalid_argument("power model: anchor must be [robots, watts]");
            m.anchors.push_back({pair[0].get<double>(), pair[1].get<double>()});
        }
        m.emission_factor = j.at("emission_factor").get<double>();
        if (j.contains("observed_emissions"))
            for (const auto& pair : j["observed_emissions"]) {
                if (!pair.is_array() || pair.size() != 2)
                    throw std::invalid_argument(
                        "power model: observed emission must be [watts, mg]");
                m.observed.push_back({pair[0].get<double>(), pair[1].get<double>()});
            }
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("power model: bad JSON shape: ") + e.what());
    }
    m.validate();
    return m;
}

std::string PowerModel::to_json_text() const {
    validate();
    json j;
    j["platform"] = platform;
    j["model"] = model;
    j["anchors"] = json::array();
    for (const auto& a : anchors) j["anchors"].push_back({a.robots, a.watts});
    j["emission_factor"] = emission_factor;
    j["observed_emissions"] = json::array();
    for (const auto& r : observed) j["observed_emissions"].push_back({r.watts, r.observed_mg});
    return j.dump(2);
}

}  // namespace e5sh::energy
