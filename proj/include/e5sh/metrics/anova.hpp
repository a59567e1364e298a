#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace e5sh::metrics {

struct FactorObservation {
    std::string a;  // first factor level (e.g. network)
    std::string b;  // second factor level (e.g. protocol)
    double value = 0.0;
};

struct FactorEffect {
    double ss = 0.0;
    int df = 0;
    double ms = 0.0;
    double f = 0.0;
    double p_value = 1.0;
};

struct AnovaResult {
    FactorEffect factor_a;
    FactorEffect factor_b;
    FactorEffect interaction;
    double residual_ss = 0.0;
    int residual_df = 0;
    double residual_ms = 0.0;
    double grand_mean = 0.0;
    // True when the sample carries (effectively) zero variance: every F is
    // reported as 0 with p = 1 rather than as a 0/0.
    bool degenerate = false;
    std::vector<std::string> a_levels;  // sorted
    std::vector<std::string> b_levels;  // sorted
};

// Two-way fixed-effects analysis on the cell-mean model. Sums of squares use
// count-weighted marginal and cell means (the classical decomposition, exact
// for balanced designs); F = MS_effect / MS_residual. p-values are the
// fraction of whole-sample value permutations whose F meets or exceeds the
// observed one, with the permutation stream derived from `seed`.
//
// Requires at least two levels per factor and at least two observations in
// every (a, b) cell; throws std::invalid_argument otherwise.
AnovaResult factor_analysis(const std::vector<FactorObservation>& observations, uint64_t seed,
                            int permutations = 10000);

}  // namespace e5sh::metrics
