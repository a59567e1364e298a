#pragma once

#include <string>
#include <vector>

namespace e5sh::energy {

// One measured operating point: total watts drawn while serving `robots`
// concurrent segmentation streams.
struct PowerAnchor {
    double robots = 0;
    double watts = 0;
};

// A paired (watts, mg CO2 per reporting interval) reading used to judge how
// well the single fitted emission factor matches observations.
struct EmissionReading {
    double watts = 0;
    double observed_mg = 0;
};

// Piecewise-linear power draw over the number of robots served, with a single
// per-watt emission factor. The factor is fitted to the one-robot reading;
// the remaining readings are kept so the fit residual can be reported rather
// than hidden (the observed pairs are not exactly proportional).
struct PowerModel {
    std::string platform;  // "edge" | "njxn"
    std::string model;     // "detectron2" | "d2go"
    std::vector<PowerAnchor> anchors;             // strictly increasing robots
    double emission_factor = 0;                   // mg CO2 per watt per interval
    std::vector<EmissionReading> observed;        // optional reference readings

    // Throws std::invalid_argument on empty anchors, non-increasing robot
    // counts, decreasing watts, or a non-positive emission factor.
    void validate() const;

    static PowerModel from_json_text(const std::string& text);
    std::string to_json_text() const;
};

// Built-in models with the reference operating points:
//   edge/detectron2: (1, 33.6) (2, 48.3) (3, 59.7) (12, 240)
//   edge/d2go:       (12, 200), with 1..3 scaled from detectron2 by 200/240
//   njxn/*:          per-robot boards, total watts linear in the fleet size
// Throws std::invalid_argument for unknown names.
PowerModel default_power_model(const std::string& platform, const std::string& model);

// Watts drawn while serving n robots: exact at anchors, linear between them,
// linear extrapolation beyond either end. Requires n >= 1.
double power_at(const PowerModel& m, double n);

// mg CO2 per reporting interval at the given draw: watts * emission_factor.
// Requires watts >= 0.
double emission_mg(const PowerModel& m, double watts);

// How far the fitted factor strays from each recorded reading.
struct EmissionResidual {
    double watts = 0;
    double observed_mg = 0;
    double fitted_mg = 0;
    double relative_error = 0;  // |fitted - observed| / observed
};

std::vector<EmissionResidual> emission_residuals(const PowerModel& m);

// Largest relative residual, or 0 when no readings are recorded. Reports
// should surface a warning when this exceeds ~5%: the single-factor model is
// deliberately simple and its error must stay visible.
double max_emission_residual(const PowerModel& m);

// Shared-server draw relative to giving each of the n robots its own board:
// power_at(server, n) / (n * power_at(board, 1)). Requires n >= 1.
double consumption_ratio(const PowerModel& server, const PowerModel& board, double n);

// consumption_ratio over the built-in models for the named segmentation model.
double consumption_ratio(const std::string& model, double n);

// One row of the `energy` report table.
struct EnergyRow {
    int robots = 0;
    double edge_watts = 0;
    double edge_mg = 0;
    double board_watts = 0;  // n standalone boards in total
    double board_mg = 0;
    double ratio = 0;
};

// Rows for n = 1..max_robots over the built-in models. Requires max_robots >= 1.
std::vector<EnergyRow> energy_table(const std::string& model, int max_robots);

}  // namespace e5sh::energy
