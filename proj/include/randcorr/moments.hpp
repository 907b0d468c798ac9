// Correlation-moment estimation. Three estimator routes share one result
// type: the exact tensor route (m = 3^-|A| sum T^2), the plain sample mean
// over settings, and a deconvolution estimate that strips the upward bias
// a finite shot count puts on squared correlations.
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "randcorr/core.hpp"
#include "randcorr/sampling.hpp"
#include "randcorr/subset.hpp"

namespace randcorr {

enum class EstimatorTag { raw, bayes_corrected, exact };

inline std::string estimator_tag_name(EstimatorTag tag) {
    switch (tag) {
        case EstimatorTag::raw: return "raw";
        case EstimatorTag::bayes_corrected: return "bayes";
        case EstimatorTag::exact: return "exact";
    }
    return "raw";
}

struct MomentEstimate {
    SubsetMask subset;
    int order = 2;
    double value = 0.0;
    double std_error = 0.0;
    EstimatorTag tag = EstimatorTag::raw;
    bool valid = false;
};

// Exact second moment from the tensor: 3^-|A| sum of squared entries
// supported exactly on the subset.
inline MomentEstimate exact_moment(const CorrelationTensor& t, SubsetMask subset) {
    require_nonempty(subset, "exact_moment");
    require_within(subset, t.qubit_count(), "exact_moment");
    const int n = t.qubit_count();
    double acc = 0.0;
    for (std::size_t mu = 0; mu < t.size(); ++mu)
        if (support_mask(mu, n) == subset.bits) acc += t[mu] * t[mu];
    MomentEstimate m;
    m.subset = subset;
    m.order = 2;
    m.value = acc / std::pow(3.0, subset.size());
    m.std_error = 0.0;
    m.tag = EstimatorTag::exact;
    m.valid = true;
    return m;
}

// Statistical error of the k-th sample moment over N_s settings,
//   (Delta m^(k))^2 = (1/N_s) [ m^(2k) - (N_s-3)/(N_s-1) (m^(k))^2 ],
// the variance-of-the-sample-variance form for k = 2.
inline double moment_std_error(double mk, double m2k, std::size_t ns) {
    if (ns < 4) throw std::invalid_argument("moment error formula needs at least 4 settings");
    double corr = double(ns - 3) / double(ns - 1);
    double var = (m2k - corr * mk * mk) / double(ns);
    return std::sqrt(std::max(0.0, var));
}

inline MomentEstimate estimate_moment(const CorrelationDataset& ds, SubsetMask subset,
                                      int order = 2) {
    require_nonempty(subset, "estimate_moment");
    require_within(subset, ds.n, "estimate_moment");
    if (order < 1) throw std::invalid_argument("moment order must be positive");
    if (ds.setting_count() < 4)
        throw std::invalid_argument("too few settings (need >= 4)");
    double mk = 0.0, m2k = 0.0;
    for (const auto& rec : ds.records) {
        double e = rec.correlations[subset.bits];
        double ek = std::pow(e, order);
        mk += ek;
        m2k += ek * ek;
    }
    mk /= double(ds.setting_count());
    m2k /= double(ds.setting_count());
    MomentEstimate m;
    m.subset = subset;
    m.order = order;
    m.value = mk;
    m.std_error = moment_std_error(mk, m2k, ds.setting_count());
    m.tag = EstimatorTag::raw;
    m.valid = true;
    return m;
}

// --------------------------------------------------------------------------
// Finite-shot bias correction
// --------------------------------------------------------------------------
//
// A correlation estimated from N_c shots scatters around its ideal value
// E_R with an approximately Gaussian kernel of width
// sigma(E_R) = sqrt(1 - E_R^2) / sqrt(N_c), which biases the naive second
// moment upward by about (1 - m)/N_c. The corrector discretizes both the
// ideal and measured values on a uniform grid over [-1, 1], takes the
// empirical distribution of measured values as the starting guess for the
// ideal one, and repeatedly applies the Bayes update
//
//   p(E_R) <- integral dE_M  p(E_M|E_R) p(E_R) / p_pred(E_M) * p_emp(E_M),
//
// which is Richardson-Lucy deconvolution of the shot kernel. A single pass
// removes only a quarter of the bias when the true distribution is a point
// mass; the default 30 passes remove well over two thirds while leaving
// broad distributions essentially untouched.

struct BayesOptions {
    std::size_t grid_points = 2001;
    int iterations = 30;
};

class BayesCorrector {
  public:
    explicit BayesCorrector(std::uint32_t shot_count, BayesOptions opts = {})
        : shots_(shot_count), opts_(opts) {
        if (opts_.grid_points < 3) throw std::invalid_argument("grid too small");
        if (opts_.iterations < 1) throw std::invalid_argument("need at least one update pass");
        const std::size_t g = opts_.grid_points;
        grid_.resize(g);
        weight_.assign(g, 2.0 / double(g - 1));  // trapezoid weights on [-1, 1]
        weight_.front() *= 0.5;
        weight_.back() *= 0.5;
        for (std::size_t i = 0; i < g; ++i)
            grid_[i] = -1.0 + 2.0 * double(i) / double(g - 1);
        if (shots_ != kExactShots) build_kernel();
    }

    std::uint32_t shot_count() const { return shots_; }

    // Corrected second moment of the ideal correlation for one subset's
    // measured sample.
    double corrected_second_moment(const std::vector<double>& samples) const {
        std::vector<double> p_emp = empirical_density(samples);
        if (shots_ == kExactShots) {
            // No shot noise: the kernel is a point mass and the update is a
            // no-op, so integrate the empirical density directly.
            return second_moment(p_emp);
        }
        std::vector<double> prior = p_emp;
        std::vector<double> predicted(grid_.size());
        std::vector<double> ratio(grid_.size());
        for (int pass = 0; pass < opts_.iterations; ++pass) {
            // predicted p(E_M) under the current guess
            std::fill(predicted.begin(), predicted.end(), 0.0);
            for (std::size_t i = 0; i < grid_.size(); ++i) {
                double pw = prior[i] * weight_[i];
                if (pw == 0.0) continue;
                const double* krow = kernel_.data() + row_offset_[i];
                for (std::size_t j = row_lo_[i]; j <= row_hi_[i]; ++j)
                    predicted[j] += pw * krow[j - row_lo_[i]];
            }
            for (std::size_t j = 0; j < grid_.size(); ++j)
                ratio[j] = predicted[j] > 0.0 ? p_emp[j] / predicted[j] : 0.0;
            double total = 0.0;
            for (std::size_t i = 0; i < grid_.size(); ++i) {
                if (prior[i] != 0.0) {
                    const double* krow = kernel_.data() + row_offset_[i];
                    double acc = 0.0;
                    for (std::size_t j = row_lo_[i]; j <= row_hi_[i]; ++j)
                        acc += weight_[j] * krow[j - row_lo_[i]] * ratio[j];
                    prior[i] *= acc;
                }
                total += prior[i] * weight_[i];
            }
            if (total <= 0.0) throw std::runtime_error("bias correction collapsed to zero");
            for (double& v : prior) v /= total;
        }
        return second_moment(prior);
    }

  private:
    void build_kernel() {
        const std::size_t g = grid_.size();
        const double h = 2.0 / double(g - 1);
        row_lo_.resize(g);
        row_hi_.resize(g);
        row_offset_.resize(g);
        kernel_.clear();
        for (std::size_t i = 0; i < g; ++i) {
            double e = grid_[i];
            double sigma = std::sqrt(std::max(0.0, 1.0 - e * e) / double(shots_));
            sigma = std::max(sigma, 0.5 * h);  // keep the kernel resolvable on the grid
            double span = 8.0 * sigma;
            row_lo_[i] = std::size_t(std::max(0.0, std::floor((e - span + 1.0) / h)));
            row_hi_[i] = std::size_t(std::min(double(g - 1), std::ceil((e + span + 1.0) / h)));
            row_offset_[i] = kernel_.size();
            double norm = 0.0;
            std::size_t base = kernel_.size();
            for (std::size_t j = row_lo_[i]; j <= row_hi_[i]; ++j) {
                double d = (grid_[j] - e) / sigma;
                double k = std::exp(-0.5 * d * d);
                kernel_.push_back(k);
                norm += k * weight_[j];
            }
            // each row integrates to 1 over the measured axis
            for (std::size_t j = base; j < kernel_.size(); ++j) kernel_[j] /= norm;
        }
    }

    // Sample density on the grid via linear mass splitting, normalized to
    // integrate to 1 under the trapezoid weights.
    std::vector<double> empirical_density(const std::vector<double>& samples) const {
        if (samples.empty()) throw std::invalid_argument("empty sample");
        const std::size_t g = grid_.size();
        const double h = 2.0 / double(g - 1);
        std::vector<double> p(g, 0.0);
        for (double e : samples) {
            double x = (std::clamp(e, -1.0, 1.0) + 1.0) / h;
            std::size_t i0 = std::min(g - 2, std::size_t(x));
            double frac = x - double(i0);
            p[i0] += 1.0 - frac;
            p[i0 + 1] += frac;
        }
        double total = 0.0;
        for (std::size_t i = 0; i < g; ++i) total += p[i] * weight_[i];
        for (double& v : p) v /= total;
        return p;
    }

    double second_moment(const std::vector<double>& density) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < grid_.size(); ++i)
            acc += weight_[i] * grid_[i] * grid_[i] * density[i];
        return acc;
    }

    std::uint32_t shots_;
    BayesOptions opts_;
    std::vector<double> grid_;
    std::vector<double> weight_;
    std::vector<double> kernel_;  // banded rows, ideal value indexes the row
    std::vector<std::size_t> row_lo_, row_hi_, row_offset_;
};

inline MomentEstimate bayes_correct_moment(const CorrelationDataset& ds, SubsetMask subset,
                                           const BayesCorrector& corrector) {
    MomentEstimate m = estimate_moment(ds, subset, 2);
    m.value = corrector.corrected_second_moment(ds.subset_samples(subset));
    m.tag = EstimatorTag::bayes_corrected;
    return m;
}

inline MomentEstimate bayes_correct_moment(const CorrelationDataset& ds, SubsetMask subset,
                                           BayesOptions opts = {}) {
    BayesCorrector corrector(ds.shots, opts);
    return bayes_correct_moment(ds, subset, corrector);
}

}  // namespace randcorr
