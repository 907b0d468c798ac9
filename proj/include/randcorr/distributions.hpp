// Correlation-distribution tools: histograms, reference densities for
// known state families, Kolmogorov-Smirnov tests, and the factorization
// test that flags entanglement when a joint correlation distribution is
// not the product of its marginal distributions.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "randcorr/rng.hpp"
#include "randcorr/sampling.hpp"
#include "randcorr/subset.hpp"

namespace randcorr {

// --------------------------------------------------------------------------
// Histograms
// --------------------------------------------------------------------------

enum class HistogramNorm { counts, density };

struct Histogram {
    double lo = 0.0, hi = 1.0;
    std::vector<double> values;  // one per bin
    HistogramNorm norm = HistogramNorm::counts;
    std::size_t sample_count = 0;

    std::size_t bins() const { return values.size(); }
    double bin_width() const { return (hi - lo) / double(bins()); }
    double bin_center(std::size_t i) const { return lo + (double(i) + 0.5) * bin_width(); }
};

inline Histogram make_histogram(const std::vector<double>& samples, std::size_t bins, double lo,
                                double hi, HistogramNorm norm = HistogramNorm::counts) {
    if (bins < 2) throw std::invalid_argument("histogram needs at least 2 bins");
    if (samples.empty()) throw std::invalid_argument("histogram of empty sample");
    Histogram h;
    h.lo = lo;
    h.hi = hi;
    h.norm = norm;
    h.sample_count = samples.size();
    h.values.assign(bins, 0.0);
    double width = (hi - lo) / double(bins);
    for (double x : samples) {
        auto i = std::size_t(std::clamp((x - lo) / width, 0.0, double(bins) - 1.0));
        h.values[i] += 1.0;
    }
    if (norm == HistogramNorm::density)
        for (double& v : h.values) v /= double(samples.size()) * width;
    return h;
}

// Histogram of one subset's correlations over all settings; modulus |E| on
// [0, 1] by default, signed E on [-1, 1] on request.
inline Histogram histogram(const CorrelationDataset& ds, SubsetMask subset, std::size_t bins,
                           bool signed_values = false,
                           HistogramNorm norm = HistogramNorm::counts) {
    std::vector<double> samples = ds.subset_samples(subset);
    if (!signed_values)
        for (double& v : samples) v = std::abs(v);
    return signed_values ? make_histogram(samples, bins, -1.0, 1.0, norm)
                         : make_histogram(samples, bins, 0.0, 1.0, norm);
}

// --------------------------------------------------------------------------
// Reference distributions of |E|
// --------------------------------------------------------------------------

enum class DistributionModel {
    product_pure,  // n-qubit pure product state: (-ln e)^(n-1) / (n-1)!
    uniform,       // maximally entangled two-qubit state: flat on [0, 1]
    mixed_delta,   // maximally mixed: point mass at 0
};

inline double theoretical_density(DistributionModel model, int n, double e) {
    switch (model) {
        case DistributionModel::product_pure: {
            if (n < 1) throw std::invalid_argument("product_pure needs n >= 1");
            if (e < 0.0 || e > 1.0) return 0.0;
            if (n == 1) return 1.0;
            if (e == 0.0) return std::numeric_limits<double>::infinity();
            double log_fact = std::lgamma(double(n));
            return std::exp(double(n - 1) * std::log(-std::log(e)) - log_fact);
        }
        case DistributionModel::uniform:
            return (e >= 0.0 && e <= 1.0) ? 1.0 : 0.0;
        case DistributionModel::mixed_delta:
            return e == 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    }
    throw std::invalid_argument("unsupported distribution model");
}

// CDF of |E|; for the product-pure family,
//   F(e) = e * sum_{i<n} (-ln e)^i / i!.
inline double theoretical_cdf(DistributionModel model, int n, double e) {
    switch (model) {
        case DistributionModel::product_pure: {
            if (n < 1) throw std::invalid_argument("product_pure needs n >= 1");
            if (e <= 0.0) return 0.0;
            if (e >= 1.0) return 1.0;
            double l = -std::log(e);
            double term = 1.0, sum = 1.0;
            for (int i = 1; i < n; ++i) {
                term *= l / double(i);
                sum += term;
            }
            return e * sum;
        }
        case DistributionModel::uniform:
            return std::clamp(e, 0.0, 1.0);
        case DistributionModel::mixed_delta:
            return e >= 0.0 ? 1.0 : 0.0;
    }
    throw std::invalid_argument("unsupported distribution model");
}

inline std::vector<double> theoretical_density(DistributionModel model, int n,
                                               const std::vector<double>& grid) {
    std::vector<double> out;
    out.reserve(grid.size());
    for (double e : grid) out.push_back(theoretical_density(model, n, e));
    return out;
}

// --------------------------------------------------------------------------
// Kolmogorov-Smirnov machinery
// --------------------------------------------------------------------------

// Asymptotic critical coefficient: c(alpha) = sqrt(-ln(alpha/2) / 2).
inline double ks_critical_coefficient(double alpha) {
    if (alpha <= 0.0 || alpha >= 1.0) throw std::invalid_argument("alpha must be in (0, 1)");
    return std::sqrt(-0.5 * std::log(alpha / 2.0));
}

template <typename Cdf>
double ks_statistic_against(std::vector<double> sample, Cdf&& cdf) {
    if (sample.empty()) throw std::invalid_argument("empty sample");
    std::sort(sample.begin(), sample.end());
    double d = 0.0;
    const double n = double(sample.size());
    for (std::size_t i = 0; i < sample.size(); ++i) {
        double f = cdf(sample[i]);
        d = std::max(d, std::max(f - double(i) / n, double(i + 1) / n - f));
    }
    return d;
}

inline double ks_statistic_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(double(i) / double(a.size()) - double(j) / double(b.size())));
    }
    return d;
}

enum class ProductVerdict { consistent_with_product, product_rejected };

struct TestResult {
    double statistic = 0.0;
    double threshold = 0.0;
    ProductVerdict verdict = ProductVerdict::consistent_with_product;
};

// Two-sample KS between the joint correlations E_{A u B} and a synthetic
// product sample E_A * E_B built from independently permuted marginal
// values (the permutations decorrelate the per-setting pairing). Rejection
// witnesses entanglement across A|B for states known to be pure; the
// purity-aware quantitative test lives in witness.hpp.
inline TestResult product_distribution_test(const CorrelationDataset& ds, SubsetMask a,
                                            SubsetMask b, double alpha,
                                            std::uint64_t permutation_seed = 0x70726f64ull) {
    require_nonempty(a, "product_distribution_test");
    require_nonempty(b, "product_distribution_test");
    require_within(a, ds.n, "product_distribution_test");
    require_within(b, ds.n, "product_distribution_test");
    if (a.bits & b.bits)
        throw std::invalid_argument("product_distribution_test: subsets overlap");
    std::vector<double> joint = ds.subset_samples(SubsetMask(a.bits | b.bits));
    std::vector<double> ea = ds.subset_samples(a);
    std::vector<double> eb = ds.subset_samples(b);

    Rng rng(permutation_seed ^ ds.seed, (std::uint64_t(a.bits) << 32) | b.bits);
    auto shuffle = [&rng](std::vector<double>& v) {
        for (std::size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[rng.below(i)]);
    };
    shuffle(ea);
    shuffle(eb);
    std::vector<double> product(ea.size());
    for (std::size_t i = 0; i < ea.size(); ++i) product[i] = ea[i] * eb[i];

    TestResult res;
    res.statistic = ks_statistic_two_sample(joint, product);
    double m = double(joint.size());
    res.threshold = ks_critical_coefficient(alpha) * std::sqrt((m + m) / (m * m));
    res.verdict = res.statistic > res.threshold ? ProductVerdict::product_rejected
                                                : ProductVerdict::consistent_with_product;
    return res;
}

}  // namespace randcorr
