#pragma once

#include <cstddef>
#include <vector>

namespace e5sh::metrics {

// Linear-interpolation quantile at position (n-1)*q between order statistics
// (the "type 7" rule). q must lie in [0, 1]; samples must be non-empty.
double quantile(std::vector<double> samples, double q);

struct DistStats {
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    double iqr = 0.0;
    size_t n = 0;
};

DistStats distribution_stats(const std::vector<double>& samples);

// Inverse standard-normal CDF (quantile function), accurate to ~1e-15
// over (0, 1). Throws std::invalid_argument outside the open interval.
double inverse_normal_cdf(double p);

struct ShapiroResult {
    double w = 0.0;
    double p_value = 0.0;
    size_t n = 0;
};

// Shapiro-Wilk normality test for 3 <= n <= 5000 non-constant samples,
// following the Royston approximation: W is the squared correlation between
// the sorted sample and normal order-statistic coefficients; the p-value
// comes from a normalizing transformation of W. Throws std::invalid_argument
// on out-of-range n or a zero-range sample.
ShapiroResult shapiro_wilk(std::vector<double> samples);

}  // namespace e5sh::metrics
