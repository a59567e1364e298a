#include "e5sh/metrics/anova.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

#include "e5sh/sim/rng.hpp"

namespace e5sh::metrics {

namespace {

// Uniform integer in [0, n) from raw 64-bit draws, by rejection — avoids the
// implementation-defined std::uniform_int_distribution so permutation
// streams replay identically everywhere.
uint64_t bounded(std::mt19937_64& rng, uint64_t n) {
    const uint64_t limit = std::numeric_limits<uint64_t>::max() -
                           std::numeric_limits<uint64_t>::max() % n;
    uint64_t r;
    do {
        r = rng();
    } while (r >= limit);
    return r % n;
}

struct Design {
    size_t a_count = 0;
    size_t b_count = 0;
    std::vector<size_t> a_of;    // per observation
    std::vector<size_t> b_of;    // per observation
    std::vector<size_t> cell_n;  // per cell (a * b_count + b)

    size_t cells() const { return a_count * b_count; }
};

struct FTriple {
    double a = 0.0;
    double b = 0.0;
    double ab = 0.0;
    double ss_a = 0.0, ss_b = 0.0, ss_ab = 0.0, ss_res = 0.0, ss_total = 0.0;
    double grand_mean = 0.0;
};

FTriple f_statistics(const Design& d, const std::vector<double>& v) {
    const size_t n = v.size();
    std::vector<double> cell_sum(d.cells(), 0.0);
    std::vector<double> a_sum(d.a_count, 0.0);
    std::vector<double> b_sum(d.b_count, 0.0);
    std::vector<size_t> a_n(d.a_count, 0), b_n(d.b_count, 0);
    double grand = 0.0;
    for (size_t i = 0; i < n; ++i) {
        cell_sum[d.a_of[i] * d.b_count + d.b_of[i]] += v[i];
        a_sum[d.a_of[i]] += v[i];
        ++a_n[d.a_of[i]];
        b_sum[d.b_of[i]] += v[i];
        ++b_n[d.b_of[i]];
        grand += v[i];
    }
    FTriple r;
    r.grand_mean = grand / static_cast<double>(n);

    for (size_t i = 0; i < d.a_count; ++i) {
        const double dm = a_sum[i] / static_cast<double>(a_n[i]) - r.grand_mean;
        r.ss_a += static_cast<double>(a_n[i]) * dm * dm;
    }
    for (size_t j = 0; j < d.b_count; ++j) {
        const double dm = b_sum[j] / static_cast<double>(b_n[j]) - r.grand_mean;
        r.ss_b += static_cast<double>(b_n[j]) * dm * dm;
    }
    double ss_cells = 0.0;
    for (size_t c = 0; c < d.cells(); ++c) {
        const double dm = cell_sum[c] / static_cast<double>(d.cell_n[c]) - r.grand_mean;
        ss_cells += static_cast<double>(d.cell_n[c]) * dm * dm;
    }
    r.ss_ab = std::max(0.0, ss_cells - r.ss_a - r.ss_b);
    for (size_t i = 0; i < n; ++i) {
        const double dc = v[i] - cell_sum[d.a_of[i] * d.b_count + d.b_of[i]] /
                                     static_cast<double>(d.cell_n[d.a_of[i] * d.b_count + d.b_of[i]]);
        r.ss_res += dc * dc;
    }
    r.ss_total = r.ss_a + r.ss_b + r.ss_ab + r.ss_res;

    const double df_a = static_cast<double>(d.a_count - 1);
    const double df_b = static_cast<double>(d.b_count - 1);
    const double df_ab = df_a * df_b;
    const double df_res = static_cast<double>(n - d.cells());
    const double ms_res = r.ss_res / df_res;
    auto f_of = [&](double ss, double df) {
        if (ms_res > 0.0) return (ss / df) / ms_res;
        return ss > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    };
    r.a = f_of(r.ss_a, df_a);
    r.b = f_of(r.ss_b, df_b);
    r.ab = f_of(r.ss_ab, df_ab);
    return r;
}

}  // namespace

AnovaResult factor_analysis(const std::vector<FactorObservation>& observations, uint64_t seed,
                            int permutations) {
    if (permutations < 0) throw std::invalid_argument("factor_analysis: negative permutation count");

    std::set<std::string> a_set, b_set;
    for (const auto& o : observations) {
        a_set.insert(o.a);
        b_set.insert(o.b);
    }
    AnovaResult out;
    out.a_levels.assign(a_set.begin(), a_set.end());
    out.b_levels.assign(b_set.begin(), b_set.end());
    if (out.a_levels.size() < 2 || out.b_levels.size() < 2)
        throw std::invalid_argument("factor_analysis: each factor needs at least two levels");

    std::map<std::string, size_t> a_index, b_index;
    for (size_t i = 0; i < out.a_levels.size(); ++i) a_index[out.a_levels[i]] = i;
    for (size_t j = 0; j < out.b_levels.size(); ++j) b_index[out.b_levels[j]] = j;

    Design d;
    d.a_count = out.a_levels.size();
    d.b_count = out.b_levels.size();
    d.cell_n.assign(d.cells(), 0);
    std::vector<double> values;
    values.reserve(observations.size());
    for (const auto& o : observations) {
        d.a_of.push_back(a_index.at(o.a));
        d.b_of.push_back(b_index.at(o.b));
        ++d.cell_n[d.a_of.back() * d.b_count + d.b_of.back()];
        values.push_back(o.value);
    }
    for (size_t c = 0; c < d.cells(); ++c)
        if (d.cell_n[c] < 2)
            throw std::invalid_argument("factor_analysis: every cell needs at least two observations");

    const FTriple obs = f_statistics(d, values);
    const int df_a = static_cast<int>(d.a_count) - 1;
    const int df_b = static_cast<int>(d.b_count) - 1;
    out.factor_a = {obs.ss_a, df_a, obs.ss_a / df_a, obs.a, 1.0};
    out.factor_b = {obs.ss_b, df_b, obs.ss_b / df_b, obs.b, 1.0};
    out.interaction = {obs.ss_ab, df_a * df_b, obs.ss_ab / (df_a * df_b), obs.ab, 1.0};
    out.residual_ss = obs.ss_res;
    out.residual_df = static_cast<int>(values.size() - d.cells());
    out.residual_ms = obs.ss_res / out.residual_df;
    out.grand_mean = obs.grand_mean;

    double scale = 0.0;
    for (double v : values) scale += v * v;
    if (obs.ss_total <= 1e-18 * std::max(1.0, scale)) {
        // No variation to explain: report no-effect rather than 0/0.
        out.degenerate = true;
        out.factor_a.f = out.factor_b.f = out.interaction.f = 0.0;
        return out;
    }
    if (permutations == 0) return out;

    // Whole-sample value permutations under the fixed design; one shared
    // shuffle stream serves all three effects.
    auto rng = sim::make_rng(seed, "factor_perm");
    std::vector<double> shuffled = values;
    int ge_a = 0, ge_b = 0, ge_ab = 0;
    for (int p = 0; p < permutations; ++p) {
        for (size_t i = shuffled.size() - 1; i > 0; --i)
            std::swap(shuffled[i], shuffled[bounded(rng, i + 1)]);
        const FTriple f = f_statistics(d, shuffled);
        if (f.a >= obs.a) ++ge_a;
        if (f.b >= obs.b) ++ge_b;
        if (f.ab >= obs.ab) ++ge_ab;
    }
    out.factor_a.p_value = static_cast<double>(ge_a) / permutations;
    out.factor_b.p_value = static_cast<double>(ge_b) / permutations;
    out.interaction.p_value = static_cast<double>(ge_ab) / permutations;
    return out;
}

}  // namespace e5sh::metrics
