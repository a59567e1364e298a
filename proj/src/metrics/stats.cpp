#include "e5sh/metrics/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace e5sh::metrics {

double quantile(std::vector<double> samples, double q) {
    if (samples.empty()) throw std::invalid_argument("quantile: empty sample");
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile: q outside [0, 1]");
    std::sort(samples.begin(), samples.end());
    double pos = (static_cast<double>(samples.size()) - 1.0) * q;
    size_t lo = static_cast<size_t>(std::floor(pos));
    size_t hi = std::min(lo + 1, samples.size() - 1);
    double frac = pos - static_cast<double>(lo);
    return samples[lo] + frac * (samples[hi] - samples[lo]);
}

DistStats distribution_stats(const std::vector<double>& samples) {
    DistStats s;
    s.n = samples.size();
    s.median = quantile(samples, 0.5);
    s.q1 = quantile(samples, 0.25);
    s.q3 = quantile(samples, 0.75);
    s.iqr = s.q3 - s.q1;
    return s;
}

double inverse_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::invalid_argument("inverse_normal_cdf: p must lie in (0, 1)");

    // Rational approximations over three regions (central, tail, far tail),
    // accurate to about 1e-16.
    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        const double num = (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                                 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                               1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
                             1.3314166789178437745e2) * r + 3.3871328727963666080e0);
        const double den = (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                                 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
                               5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
                             4.2313330701600911252e1) * r + 1.0);
        return q * num / den;
    }

    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double value;
    if (r <= 5.0) {
        r -= 1.6;
        const double num = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                                 2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                               3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
                             4.63033784615654529590e0) * r + 1.42343711074968357734e0);
        const double den = (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                                 1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                               6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
                             2.05319162663775882187e0) * r + 1.0);
        value = num / den;
    } else {
        r -= 5.0;
        const double num = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                                 1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                               2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
                             5.46378491116411436990e0) * r + 6.65790464350110377720e0);
        const double den = (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-9) * r +
                                 1.84631831751005468180e-6) * r + 7.86869131145613259100e-4) * r +
                               1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
                             5.99832206555887937690e-1) * r + 1.0);
        value = num / den;
    }
    return q < 0.0 ? -value : value;
}

namespace {

// Polynomial with ascending-order coefficients c[0] + c[1]*x + ...
double poly(const double* c, int order, double x) {
    double r = c[0];
    if (order == 1) return r;
    double p = x * c[order - 1];
    for (int j = order - 2; j >= 1; --j) p = (p + c[j]) * x;
    return r + p;
}

// Normalizing-transformation constants for the W statistic.
constexpr double kC1[6] = {0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056};
constexpr double kC2[6] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
constexpr double kC3[4] = {0.544, -0.39978, 0.025054, -6.714e-4};
constexpr double kC4[4] = {1.3822, -0.77857, 0.062767, -0.0020322};
constexpr double kC5[4] = {-1.5861, -0.31082, -0.083751, 0.0038915};
constexpr double kC6[3] = {-0.4803, -0.082676, 0.0030302};
constexpr double kG[2] = {-2.273, 0.459};

double upper_tail(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

}  // namespace

ShapiroResult shapiro_wilk(std::vector<double> x) {
    const size_t n = x.size();
    if (n < 3 || n > 5000)
        throw std::invalid_argument("shapiro_wilk: sample size must lie in [3, 5000]");
    std::sort(x.begin(), x.end());
    const double range = x.back() - x.front();
    if (!std::isfinite(range) || range < 1e-19)
        throw std::invalid_argument("shapiro_wilk: sample has (effectively) zero variance");

    const size_t n2 = n / 2;
    const double an = static_cast<double>(n);
    std::vector<double> a(n2);
    if (n == 3) {
        a[0] = std::numbers::sqrt2 / 2.0;
    } else {
        // Expected normal order statistics for the lower half (negative),
        // then the two largest coefficients corrected and the rest rescaled
        // so the full antisymmetric vector has (approximately) unit norm.
        double summ2 = 0.0;
        for (size_t k = 1; k <= n2; ++k) {
            a[k - 1] = inverse_normal_cdf((static_cast<double>(k) - 0.375) / (an + 0.25));
            summ2 += a[k - 1] * a[k - 1];
        }
        summ2 *= 2.0;
        const double ssumm2 = std::sqrt(summ2);
        const double rsn = 1.0 / std::sqrt(an);
        const double a1 = poly(kC1, 6, rsn) - a[0] / ssumm2;
        size_t first_unscaled;
        double fac;
        if (n > 5) {
            const double a2 = -a[1] / ssumm2 + poly(kC2, 6, rsn);
            fac = std::sqrt((summ2 - 2.0 * a[0] * a[0] - 2.0 * a[1] * a[1]) /
                            (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
            a[0] = a1;
            a[1] = a2;
            first_unscaled = 2;
        } else {
            fac = std::sqrt((summ2 - 2.0 * a[0] * a[0]) / (1.0 - 2.0 * a1 * a1));
            a[0] = a1;
            first_unscaled = 1;
        }
        for (size_t k = first_unscaled; k < n2; ++k) a[k] = -a[k] / fac;
    }

    // W as the squared correlation between the (range-scaled) sorted sample
    // and the antisymmetric coefficient vector; 1-W computed directly to
    // keep precision for samples very close to normal.
    std::vector<double> coef(n, 0.0);
    for (size_t k = 0; k < n2; ++k) {
        coef[k] = -a[k];
        coef[n - 1 - k] = a[k];
    }
    double sx = 0.0;
    for (double v : x) sx += v / range;
    sx /= an;
    double ssx = 0.0, ssa = 0.0, sax = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double xs = x[i] / range - sx;
        ssx += xs * xs;
        ssa += coef[i] * coef[i];
        sax += coef[i] * xs;
    }
    const double ssassx = std::sqrt(ssa * ssx);
    double w1 = (ssassx - sax) * (ssassx + sax) / (ssa * ssx);
    w1 = std::max(w1, 0.0);

    ShapiroResult result;
    result.n = n;
    result.w = 1.0 - w1;

    if (n == 3) {
        // Exact for n = 3.
        const double pi6 = 6.0 / std::numbers::pi;
        const double stqr = std::numbers::pi / 3.0;
        result.p_value = std::clamp(pi6 * (std::asin(std::sqrt(result.w)) - stqr), 0.0, 1.0);
        return result;
    }

    double m, s, y;
    if (n <= 11) {
        const double gamma = poly(kG, 2, an);
        y = std::log(w1);
        if (y >= gamma) {
            result.p_value = 1e-19;
            return result;
        }
        y = -std::log(gamma - y);
        m = poly(kC3, 4, an);
        s = std::exp(poly(kC4, 4, an));
    } else {
        const double lan = std::log(an);
        y = std::log(w1);
        m = poly(kC5, 4, lan);
        s = std::exp(poly(kC6, 3, lan));
    }
    result.p_value = upper_tail((y - m) / s);
    return result;
}

}  // namespace e5sh::metrics
