#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "oracle.hpp"
#include "randcorr/bisep.hpp"
#include "randcorr/moments.hpp"
#include "randcorr/witness.hpp"

using namespace randcorr;

namespace {

CorrelationDataset constant_dataset(int n, double value, std::size_t count) {
    CorrelationDataset ds;
    ds.n = n;
    ds.shots = kExactShots;
    for (std::size_t j = 0; j < count; ++j) {
        SettingRecord rec;
        rec.index = j;
        rec.correlations.assign(std::size_t(1) << n, value);
        rec.correlations[0] = 1.0;
        ds.records.push_back(std::move(rec));
    }
    return ds;
}

std::vector<MomentEstimate> exact_moment_table(const CorrelationTensor& t) {
    const std::uint32_t full = SubsetMask::full(t.qubit_count()).bits;
    std::vector<MomentEstimate> table(std::size_t(full) + 1);
    for (std::uint32_t mask = 1; mask <= full; ++mask)
        table[mask] = exact_moment(t, SubsetMask(mask));
    return table;
}

}  // namespace

TEST_CASE("exact_moment") {
    CHECK(exact_moment(correlation_tensor(bell_phi(true)), SubsetMask(0b11)).value ==
          Catch::Approx(1.0 / 3.0).margin(1e-12));
    CHECK(exact_moment(correlation_tensor(make_reference_state(ReferenceState::ghz)),
                       SubsetMask::full(4))
              .value == Catch::Approx(1.0 / 9.0).margin(1e-12));
    CHECK(exact_moment(correlation_tensor(maximally_mixed(3)), SubsetMask(0b101)).value ==
          Catch::Approx(0.0).margin(1e-15));
    SECTION("agrees with the tuple-loop oracle") {
        auto rho = make_reference_state(ReferenceState::cluster);
        auto t = correlation_tensor(rho);
        for (std::uint32_t mask = 1; mask < 16; ++mask)
            CHECK(exact_moment(t, SubsetMask(mask)).value ==
                  Catch::Approx(oracle::second_moment(rho.matrix(), 4, mask)).margin(1e-12));
    }
    SECTION("matches the batch helper") {
        auto t = correlation_tensor(make_reference_state(ReferenceState::bisep, 0.2));
        auto batch = subset_second_moments(t);
        for (std::uint32_t mask = 1; mask < 16; ++mask)
            CHECK(batch[mask] == Catch::Approx(exact_moment(t, SubsetMask(mask)).value)
                                     .margin(1e-14));
    }
}

TEST_CASE("estimate_moment") {
    SECTION("sampled ghz second moment brackets the oracle") {
        auto ds = run_experiment(make_reference_state(ReferenceState::ghz), 10000, kExactShots,
                                 NoiseModel::none(), 8001, 2);
        auto est = estimate_moment(ds, SubsetMask::full(4));
        CHECK(std::abs(est.value - 1.0 / 9.0) < 3.0 * est.std_error);
        CHECK(est.tag == EstimatorTag::raw);
    }
    SECTION("degenerate sample collapses the error") {
        auto ds = constant_dataset(2, 0.5, 100);
        auto est = estimate_moment(ds, SubsetMask(0b11), 2);
        CHECK(est.value == Catch::Approx(0.25).margin(1e-15));
        double residual = 0.25 * std::sqrt(2.0 / (100.0 * 99.0));
        CHECK(est.std_error == Catch::Approx(residual).margin(1e-12));
        auto est3 = estimate_moment(ds, SubsetMask(0b11), 3);
        CHECK(est3.value == Catch::Approx(0.125).margin(1e-15));
    }
    SECTION("maximally mixed stays at zero") {
        auto ds = run_experiment(maximally_mixed(4), 10000, kExactShots, NoiseModel::none(),
                                 8002, 2);
        auto est = estimate_moment(ds, SubsetMask::full(4));
        CHECK(est.value == Catch::Approx(0.0).margin(1e-12));
    }
    SECTION("too few settings") {
        auto ds = constant_dataset(2, 0.5, 3);
        CHECK_THROWS_AS(estimate_moment(ds, SubsetMask(0b11)), std::invalid_argument);
    }
}

TEST_CASE("bayes_correct_moment") {
    SECTION("exact mode reduces to the sample estimate") {
        auto ds = run_experiment(make_reference_state(ReferenceState::ghz), 2000, kExactShots,
                                 NoiseModel::none(), 8003, 2);
        auto raw = estimate_moment(ds, SubsetMask::full(4));
        auto corrected = bayes_correct_moment(ds, SubsetMask::full(4));
        CHECK(corrected.tag == EstimatorTag::bayes_corrected);
        CHECK(std::abs(corrected.value - raw.value) < 1e-4);
    }
    SECTION("maximally mixed bias is removed") {
        // raw second moment sits near 1/475; the deconvolution strips at
        // least two thirds of it
        double raw_sum = 0.0, corr_sum = 0.0;
        const int reps = 5;
        BayesCorrector corrector(475);
        for (int rep = 0; rep < reps; ++rep) {
            auto ds = run_experiment(maximally_mixed(4), 10000, 475, NoiseModel::none(),
                                     8100 + rep, 2);
            raw_sum += estimate_moment(ds, SubsetMask::full(4)).value;
            corr_sum += bayes_correct_moment(ds, SubsetMask::full(4), corrector).value;
        }
        double raw = raw_sum / reps, corrected = corr_sum / reps;
        CHECK(raw == Catch::Approx(1.0 / 475.0).epsilon(0.25));
        CHECK(corrected < raw / 3.0);
    }
    SECTION("ghz full moment: raw biased high, corrected unbiased") {
        // Reference each dataset against its own ideal-correlation mean so
        // the check isolates the shot bias from setting-sampling noise.
        double bias_sum = 0.0, resid_sum = 0.0;
        const int reps = 6;
        BayesCorrector corrector(475);
        for (int rep = 0; rep < reps; ++rep) {
            auto ds = run_experiment(make_reference_state(ReferenceState::ghz), 10000, 475,
                                     NoiseModel::none(), 8200 + rep, 2);
            double exact_mean = 0.0;
            for (const auto& r : ds.records) exact_mean += r.exact[15] * r.exact[15];
            exact_mean /= double(ds.records.size());
            double raw = estimate_moment(ds, SubsetMask::full(4)).value;
            auto corrected = bayes_correct_moment(ds, SubsetMask::full(4), corrector);
            REQUIRE(std::abs(corrected.value - 1.0 / 9.0) < 0.01);
            bias_sum += raw - exact_mean;
            resid_sum += corrected.value - exact_mean;
        }
        double bias = bias_sum / reps;
        // upward bias (1 - m)/475 ~ 0.0019; residual after correction under
        // a third of it
        CHECK(bias > 0.0009);
        CHECK(bias < 0.0030);
        CHECK(std::abs(resid_sum / reps) < bias / 3.0);
    }
}

TEST_CASE("witness_value") {
    SECTION("ghz") {
        auto table =
            exact_moment_table(correlation_tensor(make_reference_state(ReferenceState::ghz)));
        auto w = witness_value(table, 4);
        CHECK(w.value == Catch::Approx(2.0 / 27.0).margin(1e-12));
        CHECK(w.error == 0.0);
    }
    SECTION("cluster") {
        auto table = exact_moment_table(
            correlation_tensor(make_reference_state(ReferenceState::cluster)));
        CHECK(witness_value(table, 4).value == Catch::Approx(4.0 / 81.0).margin(1e-12));
    }
    SECTION("bell pair") {
        auto table = exact_moment_table(correlation_tensor(bell_phi(true)));
        CHECK(witness_value(table, 2).value == Catch::Approx(1.0 / 3.0).margin(1e-12));
    }
    SECTION("pure product of two qubits vanishes") {
        Vector v = Vector::Zero(4);
        v[0] = 1.0;
        auto table = exact_moment_table(correlation_tensor(pure_state(2, std::move(v))));
        CHECK(table[0b11].value == Catch::Approx(1.0 / 9.0).margin(1e-12));
        CHECK(witness_value(table, 2).value == Catch::Approx(0.0).margin(1e-12));
    }
    SECTION("missing subset moment is rejected") {
        auto table =
            exact_moment_table(correlation_tensor(make_reference_state(ReferenceState::ghz)));
        table[0b0101].valid = false;
        CHECK_THROWS_AS(witness_value(table, 4), std::invalid_argument);
    }
    SECTION("mixed estimator tags are rejected") {
        auto table =
            exact_moment_table(correlation_tensor(make_reference_state(ReferenceState::ghz)));
        table[0b0101].tag = EstimatorTag::raw;
        CHECK_THROWS_AS(witness_value(table, 4), std::invalid_argument);
    }
}

TEST_CASE("exact cluster report") {
    auto report =
        witness_report_exact(correlation_tensor(make_reference_state(ReferenceState::cluster)));
    CHECK(report.full().witness.value == Catch::Approx(4.0 / 81.0).margin(1e-12));
    CHECK(report.full().verdict == Verdict::gme_detected);
    // every three-qubit marginal sits exactly on its ceiling (witness 2/27
    // at marginal purity 1/2) and must not be flagged
    for (const auto& s : report.subsets)
        if (s.subset.size() == 3) {
            CHECK(s.witness.value == Catch::Approx(2.0 / 27.0).margin(1e-12));
            CHECK(s.purity.value == Catch::Approx(0.5).margin(1e-12));
            CHECK(s.bound == Catch::Approx(2.0 / 27.0).margin(1e-12));
            CHECK(s.verdict == Verdict::not_detected);
        }
}

TEST_CASE("bisep_bound") {
    SECTION("two qubits") {
        CHECK(bisep_bound(2, 1.0) == Catch::Approx(0.0).margin(1e-15));
        CHECK(bisep_bound(2, 0.5) == Catch::Approx(1.0 / 9.0).margin(1e-15));
        // branch continuity at 1/2
        CHECK(bisep_bound(2, 0.5 - 1e-13) == Catch::Approx(bisep_bound(2, 0.5 + 1e-13))
                                                 .margin(1e-12));
    }
    SECTION("three qubits: both branches give 2/27 at purity 1/2") {
        CHECK(bisep_bound(3, 0.5) == Catch::Approx(2.0 / 27.0).margin(1e-15));
        CHECK(4.0 * 0.5 / 27.0 == Catch::Approx(8.0 * 0.5 * 0.5 / 27.0).margin(1e-15));
        CHECK(bisep_bound(3, 0.25) == Catch::Approx(1.0 / 27.0).margin(1e-15));
    }
    SECTION("four qubits: branches agree at the knee") {
        double knee = kFourQubitKnee;
        double lo = 2.0 * (-8.0 * knee * knee + 16.0 * knee + 1.0) / 243.0;
        double hi = 8.0 * (1.0 - knee * knee) / 81.0;
        CHECK(lo == Catch::Approx(hi).margin(1e-12));
        CHECK(bisep_bound(4, 0.25) == Catch::Approx(3.0 / 81.0).margin(1e-15));
    }
    SECTION("domain errors") {
        CHECK_THROWS_AS(bisep_bound(2, 0.1), std::invalid_argument);
        CHECK_THROWS_AS(bisep_bound(2, 1.1), std::invalid_argument);
        CHECK_THROWS_AS(bisep_bound(5, 0.5), std::invalid_argument);
    }
}

TEST_CASE("witness_report") {
    SECTION("simulated ghz detects four-partite entanglement and nothing spurious") {
        auto ds = run_experiment(make_reference_state(ReferenceState::ghz), 10000, 475,
                                 NoiseModel::none(), 9001, 2);
        ReportOptions opts;
        opts.threads = 2;
        auto report = witness_report(ds, opts);
        CHECK(report.estimator == EstimatorTag::bayes_corrected);
        CHECK(report.full().verdict == Verdict::gme_detected);
        CHECK(std::abs(report.full().witness.value - 2.0 / 27.0) <
              3.0 * report.full().witness.error);
        CHECK(report.purity.value == Catch::Approx(1.0).margin(0.05));
        for (const auto& s : report.subsets)
            if (s.subset.size() == 3) CHECK(s.verdict == Verdict::not_detected);
    }
    SECTION("trisep flags only the entangled pair") {
        auto ds = run_experiment(make_reference_state(ReferenceState::trisep), 10000,
                                 kExactShots, NoiseModel::none(), 9002, 2);
        auto report = witness_report(ds);
        CHECK(report.subset(SubsetMask(0b0011)).verdict == Verdict::entangled);
        CHECK(report.full().verdict == Verdict::not_detected);
        CHECK(report.subset(SubsetMask(0b0100)).purity.value ==
              Catch::Approx(1.0).margin(0.02));
        CHECK(report.subset(SubsetMask(0b1000)).purity.value ==
              Catch::Approx(1.0).margin(0.02));
    }
    SECTION("maximally mixed flags nothing") {
        auto ds = run_experiment(maximally_mixed(4), 10000, 475, NoiseModel::none(), 9003, 2);
        ReportOptions opts;
        opts.threads = 2;
        auto report = witness_report(ds, opts);
        for (const auto& s : report.subsets)
            if (s.has_witness) CHECK(s.verdict == Verdict::not_detected);
    }
}

TEST_CASE("purity identity on random mixed states") {
    Rng rng(606);
    for (int n = 2; n <= 4; ++n)
        for (int rep = 0; rep < 30; ++rep) {
            DensityMatrix rho(n, random_mixed_matrix(std::size_t(1) << n, rng));
            auto table = exact_moment_table(correlation_tensor(rho));
            auto p = purity_from_moments(table, n);
            REQUIRE(std::abs(p.value - rho.purity()) < 1e-10);
        }
}

TEST_CASE("exact report is invariant under local unitaries") {
    Rng rng(707);
    auto rho = make_reference_state(ReferenceState::cluster);
    auto base = witness_report_exact(correlation_tensor(rho));
    for (int rep = 0; rep < 5; ++rep) {
        std::vector<LocalUnitary> us;
        for (int q = 0; q < 4; ++q) us.push_back(haar_local_unitary(rng));
        auto rotated = witness_report_exact(correlation_tensor(apply_local_unitaries(rho, us)));
        REQUIRE(std::abs(base.purity.value - rotated.purity.value) < 1e-10);
        for (std::size_t i = 0; i < base.subsets.size(); ++i) {
            REQUIRE(std::abs(base.subsets[i].moment.value - rotated.subsets[i].moment.value) <
                    1e-10);
            if (base.subsets[i].has_witness)
                REQUIRE(std::abs(base.subsets[i].witness.value -
                                 rotated.subsets[i].witness.value) < 1e-10);
        }
    }
}

TEST_CASE("tightness families meet their ceilings") {
    SECTION("two-qubit classical mixture, every p") {
        for (int i = 0; i <= 100; ++i) {
            double p = double(i) / 100.0;
            auto t = correlation_tensor(boundary_state(2, p));
            auto table = exact_moment_table(t);
            double w = witness_value(table, 2).value;
            double q = 2.0 * p - 1.0;
            REQUIRE(w == Catch::Approx((1.0 - q * q * q * q) / 9.0).margin(1e-12));
            REQUIRE(w == Catch::Approx(bisep_bound(2, purity(t))).margin(1e-12));
        }
    }
    SECTION("three-qubit bell mixture, purity >= 1/2") {
        for (int i = 0; i <= 100; ++i) {
            double p = double(i) / 100.0;
            auto t = correlation_tensor(boundary_state(3, p));
            auto table = exact_moment_table(t);
            double w = witness_value(table, 3).value;
            double pur = purity(t);
            REQUIRE(pur >= 0.5 - 1e-12);
            double q = 2.0 * p - 1.0;
            REQUIRE(w == Catch::Approx(2.0 * (1.0 - q * q * q * q) / 27.0).margin(1e-12));
            REQUIRE(w == Catch::Approx(bisep_bound(3, pur)).margin(1e-12));
        }
    }
}

TEST_CASE("strength test vector") {
    // Unit total pair correlation yet witness above the separable ceiling:
    // the two-body moment alone cannot see this state's entanglement.
    const double s3 = 1.0 / std::sqrt(3.0);
    const double root = std::sqrt(2.0) * std::pow(3.0, 0.75);
    auto t = CorrelationTensor::zero(2);
    t[0] = 1.0;
    t[t.flat_index({1, 1})] = s3;
    t[t.flat_index({2, 2})] = s3;
    t[t.flat_index({3, 3})] = -s3;
    t[t.flat_index({0, 3})] = (-3.0 + std::sqrt(3.0) + root) / 6.0;
    t[t.flat_index({3, 0})] = (-3.0 + std::sqrt(3.0) - root) / 6.0;

    auto rho = state_from_tensor(t);  // physical
    CHECK(rho.min_eigenvalue() > -1e-12);

    double mbar = 0.0;
    for (int j = 1; j <= 3; ++j)
        for (int k = 1; k <= 3; ++k) {
            double v = t.at({j, k});
            mbar += v * v;
        }
    CHECK(mbar == Catch::Approx(1.0).margin(1e-12));

    auto table = exact_moment_table(t);
    double w = witness_value(table, 2).value;
    double pur = purity(t);
    CHECK(pur == Catch::Approx(2.0 / 3.0).margin(1e-12));
    CHECK(w == Catch::Approx((5.0 + 2.0 * std::sqrt(3.0)) / 81.0).margin(1e-12));
    CHECK(w - bisep_bound(2, pur) ==
          Catch::Approx((2.0 * std::sqrt(3.0) - 3.0) / 81.0).margin(1e-12));
    CHECK(w > bisep_bound(2, pur));
}
