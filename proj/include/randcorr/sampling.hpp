// Randomized local measurements: Haar-uniform settings, exact correlation
// evaluation, finite-shot outcome simulation and unitary channel-noise
// emulation. One record per setting carries the estimated correlation of
// every nonempty qubit subset, all derived from the same shots.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "randcorr/core.hpp"
#include "randcorr/parallel.hpp"
#include "randcorr/rng.hpp"
#include "randcorr/subset.hpp"

namespace randcorr {

inline constexpr std::uint32_t kExactShots = 0;  // shot count sentinel: no sampling noise

struct MeasurementSetting {
    // One unit Bloch direction per qubit.
    std::vector<std::array<double, 3>> directions;

    int qubit_count() const { return int(directions.size()); }

    void validate() const {
        for (const auto& d : directions) {
            double norm = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
            if (std::abs(norm - 1.0) > 1e-12)
                throw std::invalid_argument("measurement direction is not unit length");
        }
    }
};

inline MeasurementSetting sample_setting(int n, Rng& rng) {
    require_qubit_count(n);
    MeasurementSetting s;
    s.directions.reserve(n);
    for (int q = 0; q < n; ++q) s.directions.push_back(rng.unit_vector());
    return s;
}

// Correlations of every subset in one sweep: contract the tensor qubit by
// qubit, splitting each into an identity part and a direction-projected
// part. O(4^n) for all 2^n subsets.
inline std::vector<double> all_subset_correlations(const CorrelationTensor& t,
                                                   const MeasurementSetting& s) {
    const int n = t.qubit_count();
    if (s.qubit_count() != n)
        throw std::invalid_argument("setting qubit count mismatch");
    std::vector<double> cur = t.entries();
    std::vector<double> next;
    std::size_t masks = 1, rest = cur.size();
    for (int q = 0; q < n; ++q) {
        const auto& dir = s.directions[q];
        rest /= 4;
        next.assign(masks * 2 * rest, 0.0);
        for (std::size_t m = 0; m < masks; ++m) {
            const double* in = cur.data() + m * rest * 4;
            double* out_id = next.data() + m * rest;
            double* out_dir = next.data() + (m + masks) * rest;
            for (std::size_t r = 0; r < rest; ++r) {
                const double* quad = in + 4 * r;
                out_id[r] = quad[0];
                out_dir[r] = quad[1] * dir[0] + quad[2] * dir[1] + quad[3] * dir[2];
            }
        }
        cur.swap(next);
        masks *= 2;
    }
    return cur;  // cur[mask] = E_mask, cur[0] = 1
}

inline double exact_correlation(const CorrelationTensor& t, const MeasurementSetting& s,
                                SubsetMask subset) {
    require_nonempty(subset, "exact_correlation");
    require_within(subset, t.qubit_count(), "exact_correlation");
    double e = all_subset_correlations(t, s)[subset.bits];
    if (std::abs(e) > 1.0 + 1e-10)
        throw std::runtime_error("correlation exceeds 1: non-physical tensor");
    return e;
}

// In-place Walsh-Hadamard transform over 2^n entries.
inline void walsh_hadamard(std::vector<double>& v) {
    for (std::size_t half = 1; half < v.size(); half *= 2)
        for (std::size_t block = 0; block < v.size(); block += 2 * half)
            for (std::size_t i = block; i < block + half; ++i) {
                double a = v[i], b = v[i + half];
                v[i] = a + b;
                v[i + half] = a - b;
            }
}

// Joint +-1 outcome table: p(o) = 2^-n sum_A E_A prod_{q in A} o_q, with
// outcome bit q set meaning o_q = -1. Tiny negative weights from rounding
// are clipped and the table renormalized; larger ones mean the tensor was
// not a state.
inline std::vector<double> outcome_distribution(const CorrelationTensor& t,
                                                const MeasurementSetting& s) {
    std::vector<double> p = all_subset_correlations(t, s);
    walsh_hadamard(p);
    double sum = 0.0;
    for (double& x : p) {
        x /= double(p.size());
        if (x < 0.0) {
            if (x < -1e-12)
                throw std::runtime_error("negative outcome probability: non-physical tensor");
            x = 0.0;
        }
        sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-10)
        throw std::runtime_error("outcome probabilities do not sum to 1");
    for (double& x : p) x /= sum;
    return p;
}

struct SettingRecord {
    std::size_t index = 0;
    MeasurementSetting setting;
    // correlations[mask] for every mask; [0] is fixed at 1.
    std::vector<double> correlations;
    std::uint32_t shots = kExactShots;
    // Present when the record was simulated with shot noise and the exact
    // values were kept alongside.
    std::vector<double> exact;

    double correlation(SubsetMask subset) const {
        require_nonempty(subset, "SettingRecord::correlation");
        if (subset.bits >= correlations.size())
            throw std::invalid_argument("subset exceeds record size");
        return correlations[subset.bits];
    }
};

// Draws shot_count outcome tuples and estimates every subset correlation
// from the same shots (a Walsh-Hadamard transform of the outcome counts).
inline SettingRecord simulate_setting(const CorrelationTensor& t, const MeasurementSetting& s,
                                      std::uint32_t shot_count, Rng& rng) {
    SettingRecord rec;
    rec.setting = s;
    rec.shots = shot_count;
    if (shot_count == kExactShots) {
        rec.correlations = all_subset_correlations(t, s);
        rec.correlations[0] = 1.0;
        return rec;
    }
    std::vector<double> p = outcome_distribution(t, s);
    std::vector<double> cdf(p.size());
    double run = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        run += p[i];
        cdf[i] = run;
    }
    cdf.back() = 1.0;
    std::vector<double> counts(p.size(), 0.0);
    for (std::uint32_t k = 0; k < shot_count; ++k) {
        double u = rng.uniform();
        std::size_t lo = 0, hi = cdf.size() - 1;
        while (lo < hi) {
            std::size_t mid = (lo + hi) / 2;
            if (cdf[mid] > u) hi = mid; else lo = mid + 1;
        }
        counts[lo] += 1.0;
    }
    walsh_hadamard(counts);
    rec.correlations.resize(counts.size());
    for (std::size_t mask = 0; mask < counts.size(); ++mask)
        rec.correlations[mask] = counts[mask] / double(shot_count);
    rec.correlations[0] = 1.0;
    rec.exact = all_subset_correlations(t, s);
    rec.exact[0] = 1.0;
    return rec;
}

// --------------------------------------------------------------------------
// Channel noise and full experiment runs
// --------------------------------------------------------------------------

struct NoiseModel {
    enum class Mode { none, fresh_per_setting, drift };
    Mode mode = Mode::none;
    std::uint32_t block_length = 1;  // settings sharing one drift transformation

    static NoiseModel none() { return {}; }
    static NoiseModel fresh() { return {Mode::fresh_per_setting, 1}; }
    static NoiseModel drift(std::uint32_t block) {
        if (block < 1) throw std::invalid_argument("drift block length must be >= 1");
        return {Mode::drift, block};
    }

    std::string name() const {
        switch (mode) {
            case Mode::none: return "none";
            case Mode::fresh_per_setting: return "fresh";
            case Mode::drift: return "drift " + std::to_string(block_length);
        }
        return "none";
    }

    static NoiseModel parse(const std::string& text) {
        if (text == "none") return none();
        if (text == "fresh") return fresh();
        if (text.rfind("drift", 0) == 0) {
            std::string arg = text.substr(5);
            std::size_t pos = arg.find_first_not_of(" :=");
            if (pos == std::string::npos) return drift(1);
            return drift(std::uint32_t(std::stoul(arg.substr(pos))));
        }
        throw std::invalid_argument("unknown noise mode: " + text);
    }
};

struct CorrelationDataset {
    int n = 0;
    std::uint64_t seed = 0;
    std::uint32_t shots = kExactShots;
    NoiseModel noise;
    std::string state_label;
    std::vector<SettingRecord> records;

    std::size_t setting_count() const { return records.size(); }
    bool exact_mode() const { return shots == kExactShots; }

    std::vector<double> subset_samples(SubsetMask subset) const {
        require_nonempty(subset, "subset_samples");
        require_within(subset, n, "subset_samples");
        std::vector<double> out;
        out.reserve(records.size());
        for (const auto& r : records) out.push_back(r.correlations[subset.bits]);
        return out;
    }
};

namespace detail {
// Substream tags keep the independent random streams of a run disjoint.
inline constexpr std::uint64_t kSettingStream = 0x53455454ull;   // directions + shots
inline constexpr std::uint64_t kNoiseStream = 0x4e4f4953ull;     // channel drift
}  // namespace detail

// Simulates a full run: for each setting, channel noise is drawn per the
// schedule, folded into the Haar-random directions, and the correlations
// are recorded. Records are reproducible from (seed, index) alone, so the
// loop parallelizes without changing results.
inline CorrelationDataset run_experiment(const DensityMatrix& rho, std::size_t setting_count,
                                         std::uint32_t shot_count, const NoiseModel& noise,
                                         std::uint64_t seed, unsigned threads = 1) {
    if (setting_count < 1) throw std::invalid_argument("need at least one setting");
    const int n = rho.qubit_count();
    const CorrelationTensor t = correlation_tensor(rho);

    CorrelationDataset ds;
    ds.n = n;
    ds.seed = seed;
    ds.shots = shot_count;
    ds.noise = noise;
    ds.records.resize(setting_count);

    parallel_for(setting_count, threads, [&](std::size_t j) {
        Rng rng(seed ^ detail::kSettingStream, j);
        MeasurementSetting lab = sample_setting(n, rng);
        MeasurementSetting effective = lab;
        if (noise.mode != NoiseModel::Mode::none) {
            std::uint64_t block = (noise.mode == NoiseModel::Mode::fresh_per_setting)
                                      ? j
                                      : j / noise.block_length;
            for (int q = 0; q < n; ++q) {
                Rng noise_rng(seed ^ detail::kNoiseStream, block * kMaxQubits + q);
                Eigen::Matrix3d r = haar_local_unitary(noise_rng).bloch_rotation();
                const auto& a = lab.directions[q];
                Eigen::Vector3d v = r * Eigen::Vector3d(a[0], a[1], a[2]);
                v.normalize();
                effective.directions[q] = {v[0], v[1], v[2]};
            }
        }
        ds.records[j] = simulate_setting(t, effective, shot_count, rng);
        ds.records[j].index = j;
    });
    return ds;
}

}  // namespace randcorr
