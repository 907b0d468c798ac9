// Monte Carlo exploration of the witness-vs-purity plane: random
// biseparable states (mixtures of products across per-term random
// bipartitions), the named families that sit exactly on the ceilings, and
// a stratified scan that records per-purity-bin maxima and counts ceiling
// violations.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "randcorr/core.hpp"
#include "randcorr/parallel.hpp"
#include "randcorr/rng.hpp"
#include "randcorr/witness.hpp"

namespace randcorr {

// Haar-random pure state on `dim` amplitudes.
inline Vector random_pure_vector(std::size_t dim, Rng& rng) {
    Vector v(dim);
    for (std::size_t i = 0; i < dim; ++i) v[i] = Complex(rng.gaussian(), rng.gaussian());
    v.normalize();
    return v;
}

// Trace-normalized square of a complex Gaussian matrix; a standard dense
// random mixed-state ensemble.
inline Matrix random_mixed_matrix(std::size_t dim, Rng& rng) {
    Matrix g(dim, dim);
    for (std::size_t r = 0; r < dim; ++r)
        for (std::size_t c = 0; c < dim; ++c) g(r, c) = Complex(rng.gaussian(), rng.gaussian());
    Matrix rho = g * g.adjoint();
    return rho / rho.trace().real();
}

inline Matrix random_factor(std::size_t dim, Rng& rng) {
    if (rng.uniform() < 0.5) {
        Vector v = random_pure_vector(dim, rng);
        return v * v.adjoint();
    }
    Matrix rho = random_mixed_matrix(dim, rng);
    // occasionally flatten further toward white noise to reach low purity
    if (rng.uniform() < 0.3) {
        double eps = rng.uniform();
        rho = (1.0 - eps) * rho + eps * Matrix::Identity(dim, dim) / double(dim);
    }
    return rho;
}

// Proper bipartitions A|B with the first qubit kept in A, so each unordered
// cut appears once.
inline std::vector<SubsetMask> bipartitions(int n) {
    std::vector<SubsetMask> cuts;
    std::uint32_t full = SubsetMask::full(n).bits;
    for (std::uint32_t mask = 1; mask < full; ++mask)
        if (mask & 1u) cuts.push_back(SubsetMask(mask));
    return cuts;
}

// Convex mixture of up to 8 product terms, each across its own random
// bipartition. Mixing terms across different cuts stays inside the
// not-genuinely-multipartite-entangled class.
inline DensityMatrix sample_biseparable(int n, Rng& rng) {
    if (n < 3 || n > 4) throw std::invalid_argument("biseparable sampling covers n = 3, 4");
    std::vector<SubsetMask> cuts = bipartitions(n);
    int terms = 1 + int(rng.below(8));
    std::vector<std::pair<double, Matrix>> mixture;
    mixture.reserve(terms);
    for (int t = 0; t < terms; ++t) {
        SubsetMask cut = cuts[rng.below(cuts.size())];
        std::size_t dim_a = std::size_t(1) << cut.size();
        std::size_t dim_b = std::size_t(1) << (n - cut.size());
        double weight = -std::log(std::max(rng.uniform(), 1e-300));
        mixture.emplace_back(weight,
                             embed_product(n, cut, random_factor(dim_a, rng),
                                           random_factor(dim_b, rng)));
    }
    return mix(mixture, n);
}

// Product of Haar-random pure factors across a random cut, mixed with white
// noise chosen to land the purity exactly at `target`: with x = 1 - eps,
// P = 1/d + x^2 (1 - 1/d).
inline DensityMatrix biseparable_with_purity(int n, double target, Rng& rng) {
    std::vector<SubsetMask> cuts = bipartitions(n);
    SubsetMask cut = cuts[rng.below(cuts.size())];
    std::size_t dim = std::size_t(1) << n;
    std::size_t dim_a = std::size_t(1) << cut.size();
    Vector va = random_pure_vector(dim_a, rng);
    Vector vb = random_pure_vector(dim / dim_a, rng);
    Matrix prod = embed_product(n, cut, Matrix(va * va.adjoint()), Matrix(vb * vb.adjoint()));
    double invd = 1.0 / double(dim);
    target = std::clamp(target, invd, 1.0);
    double x = std::sqrt((target - invd) / (1.0 - invd));
    Matrix m = x * prod + (1.0 - x) * Matrix::Identity(dim, dim) * invd;
    return DensityMatrix(n, std::move(m));
}

// Haar-random global pure state (any entanglement class) mixed with white
// noise to hit `target` purity.
inline DensityMatrix arbitrary_with_purity(int n, double target, Rng& rng) {
    std::size_t dim = std::size_t(1) << n;
    Vector v = random_pure_vector(dim, rng);
    double invd = 1.0 / double(dim);
    target = std::clamp(target, invd, 1.0);
    double x = std::sqrt((target - invd) / (1.0 - invd));
    Matrix m = x * Matrix(v * v.adjoint()) + (1.0 - x) * Matrix::Identity(dim, dim) * invd;
    return DensityMatrix(n, std::move(m));
}

inline DensityMatrix sample_arbitrary(int n, Rng& rng) {
    if (rng.uniform() < 0.4) {
        Vector v = random_pure_vector(std::size_t(1) << n, rng);
        return DensityMatrix(n, v * v.adjoint());
    }
    Matrix rho = random_mixed_matrix(std::size_t(1) << n, rng);
    if (rng.uniform() < 0.3) {
        double eps = rng.uniform();
        std::size_t dim = std::size_t(1) << n;
        rho = (1.0 - eps) * rho + eps * Matrix::Identity(dim, dim) / double(dim);
    }
    return DensityMatrix(n, std::move(rho));
}

// --------------------------------------------------------------------------
// Ceiling-achieving families
// --------------------------------------------------------------------------

// The named mixtures that meet the biseparable ceiling with equality:
//   n=2: p|00><00| + (1-p)|11><11|
//   n=3: p phi+ x |0><0| + (1-p) phi- x |1><1|
//   n=4: p phi+_{12} x phi+_{34} + (1-p) phi+_{13} x phi+_{24}
inline DensityMatrix boundary_state(int n, double p) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("mixing weight must be in [0, 1]");
    switch (n) {
        case 2: {
            Matrix m = Matrix::Zero(4, 4);
            m(0, 0) = p;
            m(3, 3) = 1.0 - p;
            return DensityMatrix(2, std::move(m));
        }
        case 3: {
            Matrix zero = Matrix::Zero(2, 2), one = Matrix::Zero(2, 2);
            zero(0, 0) = 1.0;
            one(1, 1) = 1.0;
            Matrix m = p * embed_product(3, SubsetMask(0b011), bell_phi(true).matrix(), zero) +
                       (1.0 - p) * embed_product(3, SubsetMask(0b011), bell_phi(false).matrix(), one);
            return DensityMatrix(3, std::move(m));
        }
        case 4: {
            const Matrix phip = bell_phi(true).matrix();
            Matrix m = p * embed_product(4, SubsetMask(0b0011), phip, phip) +
                       (1.0 - p) * embed_product(4, SubsetMask(0b0101), phip, phip);
            return DensityMatrix(4, std::move(m));
        }
        default:
            throw std::invalid_argument("boundary family known only for 2..4 qubits");
    }
}

// --------------------------------------------------------------------------
// Frontier scan
// --------------------------------------------------------------------------

struct BisepSample {
    std::uint64_t stream_id = 0;  // substream id; regenerates the state exactly
    bool stratified = false;      // drawn in the purity top-up pass
    double purity = 0.0;
    double witness = 0.0;
};

struct FrontierBin {
    double lo = 0.0, hi = 0.0;
    std::size_t count = 0;
    double max_witness = -1.0;
    double bound_at_center = 0.0;
};

struct FrontierTable {
    int n = 0;
    double tolerance = 1e-9;
    std::size_t sample_count = 0;
    std::vector<FrontierBin> bins;
    std::vector<BisepSample> violations;

    std::size_t violation_count() const { return violations.size(); }
};

enum class ScanEnsemble { biseparable, all_states };

struct ScanOptions {
    double bin_width = 0.01;
    double tolerance = 1e-9;
    ScanEnsemble ensemble = ScanEnsemble::biseparable;
    std::size_t stratum_target = 100;  // minimum samples per purity bin; 0 disables
    unsigned threads = 1;
};

// Exact purity and witness of one state, with the tensor-route purity
// cross-checked against the matrix route.
struct ScanEval {
    double purity = 0.0;
    double witness = 0.0;
};

inline ScanEval evaluate_scan_sample(const DensityMatrix& rho) {
    CorrelationTensor t = correlation_tensor(rho);
    double p_tensor = purity(t);
    double p_matrix = rho.purity();
    if (std::abs(p_tensor - p_matrix) > 1e-10)
        throw std::runtime_error("purity mismatch between tensor and matrix routes");
    std::vector<double> m2 = subset_second_moments(t);
    const int n = t.qubit_count();
    const std::uint32_t full = SubsetMask::full(n).bits;
    double w = m2[full];
    for (std::uint32_t mask = 1; mask < full; ++mask)
        w -= 0.5 * m2[mask] * m2[full ^ mask];
    return {p_tensor, w};
}

namespace detail {
inline constexpr std::uint64_t kScanStream = 0x5343414eull;
inline constexpr std::uint64_t kStratumStream = 0x53545241ull;
}  // namespace detail

using StateGenerator = std::function<DensityMatrix(int n, Rng& rng)>;

// Draws `count` states from `generator`, optionally tops up sparse purity
// bins with purity-targeted samples, and tabulates per-bin witness maxima.
// In the biseparable ensemble any sample exceeding the ceiling by more
// than the tolerance is recorded with its substream id.
inline FrontierTable scan_bound_with_generator(int n, std::size_t count, std::uint64_t seed,
                                               const StateGenerator& generator,
                                               ScanOptions opts = {}) {
    if (n < 3 || n > 4) throw std::invalid_argument("frontier scan covers n = 3, 4");
    if (count < 1) throw std::invalid_argument("need at least one sample");

    FrontierTable table;
    table.n = n;
    table.tolerance = opts.tolerance;
    const double pmin = 1.0 / double(std::size_t(1) << n);
    std::size_t bin_count = std::size_t(std::ceil(1.0 / opts.bin_width));
    table.bins.resize(bin_count);
    for (std::size_t i = 0; i < bin_count; ++i) {
        table.bins[i].lo = double(i) * opts.bin_width;
        table.bins[i].hi = std::min(1.0, double(i + 1) * opts.bin_width);
        double center = 0.5 * (table.bins[i].lo + table.bins[i].hi);
        table.bins[i].bound_at_center =
            (center >= pmin && center <= 1.0) ? bisep_bound(n, center) : 0.0;
    }

    const bool check_violations = opts.ensemble == ScanEnsemble::biseparable;
    std::vector<ScanEval> evals(count);
    parallel_for(count, opts.threads, [&](std::size_t i) {
        Rng rng(seed ^ detail::kScanStream, i);
        evals[i] = evaluate_scan_sample(generator(n, rng));
    });

    auto record = [&](const ScanEval& ev, std::uint64_t stream_id, bool stratified) {
        auto b = std::size_t(std::clamp(ev.purity / opts.bin_width, 0.0,
                                        double(bin_count) - 1.0));
        table.bins[b].count += 1;
        table.bins[b].max_witness = std::max(table.bins[b].max_witness, ev.witness);
        table.sample_count += 1;
        if (check_violations &&
            ev.witness - bisep_bound(n, std::clamp(ev.purity, pmin, 1.0)) > opts.tolerance)
            table.violations.push_back({stream_id, stratified, ev.purity, ev.witness});
    };
    for (std::size_t i = 0; i < count; ++i) record(evals[i], i, false);

    // Stratification pass: reachable purities start at 2^-n; push every bin
    // above that floor to the target count with purity-targeted samples.
    if (opts.stratum_target > 0) {
        std::uint64_t stratum_id = 0;
        for (std::size_t b = 0; b < bin_count; ++b) {
            if (table.bins[b].hi <= pmin) continue;
            while (table.bins[b].count < opts.stratum_target) {
                Rng rng(seed ^ detail::kStratumStream, stratum_id);
                double target = table.bins[b].lo + opts.bin_width * rng.uniform();
                target = std::clamp(target, pmin, 1.0);
                DensityMatrix rho = check_violations
                                        ? biseparable_with_purity(n, target, rng)
                                        : arbitrary_with_purity(n, target, rng);
                record(evaluate_scan_sample(rho), stratum_id, true);
                ++stratum_id;
            }
        }
    }
    return table;
}

inline FrontierTable scan_bound(int n, std::size_t count, std::uint64_t seed,
                                ScanOptions opts = {}) {
    StateGenerator gen =
        opts.ensemble == ScanEnsemble::biseparable
            ? StateGenerator([](int nn, Rng& rng) { return sample_biseparable(nn, rng); })
            : StateGenerator([](int nn, Rng& rng) { return sample_arbitrary(nn, rng); });
    return scan_bound_with_generator(n, count, seed, gen, opts);
}

// Regenerates the state behind a recorded violation.
inline DensityMatrix regenerate_scan_sample(int n, std::uint64_t seed, const BisepSample& s,
                                            const ScanOptions& opts) {
    if (!s.stratified) {
        Rng rng(seed ^ detail::kScanStream, s.stream_id);
        return opts.ensemble == ScanEnsemble::biseparable ? sample_biseparable(n, rng)
                                                          : sample_arbitrary(n, rng);
    }
    // Stratified draws replay the same (target, factors) sequence; the
    // recorded purity pins the bin that was being filled.
    Rng rng(seed ^ detail::kStratumStream, s.stream_id);
    double lo = std::floor(s.purity / opts.bin_width) * opts.bin_width;
    double target = lo + opts.bin_width * rng.uniform();
    target = std::clamp(target, 1.0 / double(std::size_t(1) << n), 1.0);
    return opts.ensemble == ScanEnsemble::biseparable
               ? biseparable_with_purity(n, target, rng)
               : arbitrary_with_purity(n, target, rng);
}

}  // namespace randcorr
