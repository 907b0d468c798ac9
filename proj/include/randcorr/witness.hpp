// Entanglement witnesses from second moments of random correlations.
//
// The witness for a set S of qubits is
//   M_n = m_S - (1/2) sum over proper nonempty A of m_A * m_{S\A},
// and a state that is a mixture of products across any bipartition obeys a
// purity-dependent ceiling on M_n (n = 2, 3, 4). Exceeding the ceiling
// certifies entanglement (n = 2) or genuine multipartite entanglement.
#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "randcorr/moments.hpp"
#include "randcorr/parallel.hpp"

namespace randcorr {

struct ValueWithError {
    double value = 0.0;
    double error = 0.0;
};

// Witness value with first-order error propagation treating subset-moment
// errors as independent. `moments` is indexed by subset bitmask and must
// hold every nonempty subset of the full n-qubit set; entry 0 is implied 1.
inline ValueWithError witness_value(const std::vector<MomentEstimate>& moments, int n) {
    require_qubit_count(n);
    const std::uint32_t full = SubsetMask::full(n).bits;
    if (moments.size() < std::size_t(full) + 1)
        throw std::invalid_argument("witness_value: moment table too small");
    for (std::uint32_t mask = 1; mask <= full; ++mask) {
        if (!moments[mask].valid)
            throw std::invalid_argument("witness_value: missing moment for subset " +
                                        SubsetMask(mask).label());
        if (moments[mask].tag != moments[full].tag)
            throw std::invalid_argument("witness_value: mixed estimator tags");
    }
    double value = moments[full].value;
    double var = moments[full].std_error * moments[full].std_error;
    for (std::uint32_t mask = 1; mask < full; ++mask) {
        std::uint32_t comp = full ^ mask;
        value -= 0.5 * moments[mask].value * moments[comp].value;
        double deriv = moments[comp].value;  // both halves of the sum contribute
        var += deriv * deriv * moments[mask].std_error * moments[mask].std_error;
    }
    return {value, std::sqrt(var)};
}

// Purity assembled from second moments: P = 2^-n sum_A 3^|A| m_A (empty
// subset contributes 1).
inline ValueWithError purity_from_moments(const std::vector<MomentEstimate>& moments, int n) {
    require_qubit_count(n);
    const std::uint32_t full = SubsetMask::full(n).bits;
    if (moments.size() < std::size_t(full) + 1)
        throw std::invalid_argument("purity_from_moments: moment table too small");
    double scale = 1.0 / double(std::size_t(1) << n);
    double value = 1.0, var = 0.0;
    for (std::uint32_t mask = 1; mask <= full; ++mask) {
        if (!moments[mask].valid)
            throw std::invalid_argument("purity_from_moments: missing moment for subset " +
                                        SubsetMask(mask).label());
        double w = std::pow(3.0, SubsetMask(mask).size());
        value += w * moments[mask].value;
        var += w * w * moments[mask].std_error * moments[mask].std_error;
    }
    return {scale * value, scale * std::sqrt(var)};
}

// --------------------------------------------------------------------------
// Biseparable ceilings
// --------------------------------------------------------------------------

inline constexpr double kFourQubitKnee = 0.5980762113533159;  // (3*sqrt(3) - 4) / 2

inline double bisep_bound(int n, double purity) {
    double pmin = 1.0 / double(std::size_t(1) << n);
    if (purity < pmin - 1e-9 || purity > 1.0 + 1e-9)
        throw std::invalid_argument("purity outside physical range");
    purity = std::clamp(purity, pmin, 1.0);
    switch (n) {
        case 2:
            if (purity < 0.5) return (4.0 * purity - 1.0) / 9.0;
            return 4.0 * (1.0 - purity) * purity / 9.0;
        case 3:
            if (purity <= 0.25) return (8.0 * purity - 1.0) / 27.0;
            if (purity <= 0.5) return 4.0 * purity / 27.0;
            return 8.0 * (1.0 - purity) * purity / 27.0;
        case 4:
            if (purity <= 0.25) return (16.0 * purity - 1.0) / 81.0;
            if (purity <= kFourQubitKnee)
                return 2.0 * (-8.0 * purity * purity + 16.0 * purity + 1.0) / 243.0;
            return 8.0 * (1.0 - purity * purity) / 81.0;
        default:
            throw std::invalid_argument("biseparable bound known only for 2..4 qubits");
    }
}

// d(bound)/d(purity) on the branch containing `purity`; used to propagate
// the purity error into the bound.
inline double bisep_bound_slope(int n, double purity) {
    double pmin = 1.0 / double(std::size_t(1) << n);
    purity = std::clamp(purity, pmin, 1.0);
    switch (n) {
        case 2:
            return purity < 0.5 ? 4.0 / 9.0 : 4.0 * (1.0 - 2.0 * purity) / 9.0;
        case 3:
            if (purity <= 0.25) return 8.0 / 27.0;
            if (purity <= 0.5) return 4.0 / 27.0;
            return 8.0 * (1.0 - 2.0 * purity) / 27.0;
        case 4:
            if (purity <= 0.25) return 16.0 / 81.0;
            if (purity <= kFourQubitKnee) return 2.0 * (16.0 - 16.0 * purity) / 243.0;
            return -16.0 * purity / 81.0;
        default:
            throw std::invalid_argument("biseparable bound known only for 2..4 qubits");
    }
}

// --------------------------------------------------------------------------
// Reports
// --------------------------------------------------------------------------

enum class Verdict { not_detected, entangled, gme_detected };

inline std::string verdict_name(Verdict v) {
    switch (v) {
        case Verdict::not_detected: return "not-detected";
        case Verdict::entangled: return "entangled";
        case Verdict::gme_detected: return "GME-detected";
    }
    return "not-detected";
}

struct SubsetReport {
    SubsetMask subset;
    MomentEstimate moment;        // second moment of this subset's correlation
    ValueWithError purity;        // purity of the marginal on this subset
    // Witness fields are evaluated for subsets of 2..4 qubits.
    bool has_witness = false;
    ValueWithError witness;
    double bound = 0.0;
    double bound_error = 0.0;
    Verdict verdict = Verdict::not_detected;
};

struct WitnessReport {
    int n = 0;
    std::size_t setting_count = 0;
    std::uint32_t shots = kExactShots;
    EstimatorTag estimator = EstimatorTag::raw;
    double z_threshold = 3.0;
    ValueWithError purity;             // full-state purity
    std::vector<SubsetReport> subsets; // every nonempty subset, by bitmask

    const SubsetReport& subset(SubsetMask mask) const {
        for (const auto& s : subsets)
            if (s.subset == mask) return s;
        throw std::invalid_argument("subset not present in report: " + mask.label());
    }
    const SubsetReport& full() const { return subset(SubsetMask::full(n)); }
};

struct ReportOptions {
    double z_threshold = 3.0;
    BayesOptions bayes;
    // raw: plain sample means; bayes_corrected: deconvolved (default for
    // shot data). Exact-mode datasets always use raw sample means.
    EstimatorTag estimator = EstimatorTag::bayes_corrected;
    unsigned threads = 1;
};

namespace detail {
// Moments of subset B relabelled onto the qubits of A (B subset of A), so
// the witness of a marginal can reuse the full-set machinery.
inline std::vector<MomentEstimate> restrict_moments(const std::vector<MomentEstimate>& moments,
                                                    SubsetMask a) {
    std::vector<int> qs = a.qubits();
    const int k = int(qs.size());
    std::vector<MomentEstimate> out(std::size_t(1) << k);
    for (std::uint32_t local = 1; local < (1u << k); ++local) {
        std::uint32_t global = 0;
        for (int j = 0; j < k; ++j)
            if ((local >> j) & 1u) global |= 1u << qs[j];
        out[local] = moments[global];
        out[local].subset = SubsetMask(local);
    }
    return out;
}
}  // namespace detail

// Verdict for one subset: flag only when the witness clears the ceiling by
// z combined standard errors (plus a numerical guard for exact data).
inline Verdict classify(int size, double witness, double witness_err, double bound,
                        double bound_err, double z) {
    double margin = z * std::sqrt(witness_err * witness_err + bound_err * bound_err) + 1e-12;
    if (witness - bound <= margin) return Verdict::not_detected;
    return size == 2 ? Verdict::entangled : Verdict::gme_detected;
}

// Full analysis of a dataset: per-subset moments (bias-corrected for shot
// data), marginal purities, and witness verdicts for every subset of 2..4
// qubits.
inline WitnessReport witness_report(const CorrelationDataset& ds, ReportOptions opts = {}) {
    const int n = ds.n;
    require_qubit_count(n);
    const std::uint32_t full = SubsetMask::full(n).bits;

    EstimatorTag tag = opts.estimator;
    if (ds.exact_mode() && tag == EstimatorTag::bayes_corrected) tag = EstimatorTag::raw;

    std::vector<MomentEstimate> moments(std::size_t(full) + 1);
    if (tag == EstimatorTag::bayes_corrected) {
        BayesCorrector corrector(ds.shots, opts.bayes);
        parallel_for(full, opts.threads, [&](std::size_t i) {
            std::uint32_t mask = std::uint32_t(i) + 1;
            moments[mask] = bayes_correct_moment(ds, SubsetMask(mask), corrector);
        });
    } else {
        for (std::uint32_t mask = 1; mask <= full; ++mask)
            moments[mask] = estimate_moment(ds, SubsetMask(mask), 2);
    }

    WitnessReport report;
    report.n = n;
    report.setting_count = ds.setting_count();
    report.shots = ds.shots;
    report.estimator = tag;
    report.z_threshold = opts.z_threshold;
    report.purity = purity_from_moments(moments, n);

    for (std::uint32_t mask = 1; mask <= full; ++mask) {
        SubsetReport sr;
        sr.subset = SubsetMask(mask);
        sr.moment = moments[mask];
        int k = sr.subset.size();
        auto local = detail::restrict_moments(moments, sr.subset);
        sr.purity = k == n ? report.purity : purity_from_moments(local, k);
        if (k >= 2 && k <= 4) {
            sr.has_witness = true;
            sr.witness = witness_value(local, k);
            // The estimated purity can stray outside the physical range;
            // evaluate the ceiling at the nearest physical value.
            double p = std::clamp(sr.purity.value, 1.0 / double(std::size_t(1) << k), 1.0);
            sr.bound = bisep_bound(k, p);
            sr.bound_error = std::abs(bisep_bound_slope(k, p)) * sr.purity.error;
            sr.verdict = classify(k, sr.witness.value, sr.witness.error, sr.bound,
                                  sr.bound_error, opts.z_threshold);
        }
        report.subsets.push_back(std::move(sr));
    }
    return report;
}

// Same analysis for an exactly known state: all errors are zero and the
// moments come straight from the tensor.
inline WitnessReport witness_report_exact(const CorrelationTensor& t, double z = 3.0) {
    const int n = t.qubit_count();
    const std::uint32_t full = SubsetMask::full(n).bits;
    std::vector<double> m2 = subset_second_moments(t);
    std::vector<MomentEstimate> moments(std::size_t(full) + 1);
    for (std::uint32_t mask = 1; mask <= full; ++mask) {
        moments[mask].subset = SubsetMask(mask);
        moments[mask].order = 2;
        moments[mask].value = m2[mask];
        moments[mask].tag = EstimatorTag::exact;
        moments[mask].valid = true;
    }
    WitnessReport report;
    report.n = n;
    report.estimator = EstimatorTag::exact;
    report.z_threshold = z;
    report.purity = purity_from_moments(moments, n);
    for (std::uint32_t mask = 1; mask <= full; ++mask) {
        SubsetReport sr;
        sr.subset = SubsetMask(mask);
        sr.moment = moments[mask];
        int k = sr.subset.size();
        auto local = detail::restrict_moments(moments, sr.subset);
        sr.purity = k == n ? report.purity : purity_from_moments(local, k);
        if (k >= 2 && k <= 4) {
            sr.has_witness = true;
            sr.witness = witness_value(local, k);
            double p = std::clamp(sr.purity.value, 1.0 / double(std::size_t(1) << k), 1.0);
            sr.bound = bisep_bound(k, p);
            sr.verdict = classify(k, sr.witness.value, 0.0, sr.bound, 0.0, z);
        }
        report.subsets.push_back(std::move(sr));
    }
    return report;
}

}  // namespace randcorr
