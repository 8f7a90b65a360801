// Copyright 2026 The rmkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>

#include <gtest/gtest.h>

#include "rmkit/dataset.hpp"
#include "rmkit/error.hpp"
#include "rmkit/shadows.hpp"
#include "test_util.hpp"

using namespace rmkit;

namespace {

DensityState bell() { return werner_state(1.0, 1); }

::testing::AssertionResult within_sigma(const EstimateWithError &e, double truth, double k) {
    const double dev = std::abs(e.value - truth);
    if (dev <= k * e.std_error + 1e-12) return ::testing::AssertionSuccess();
    return ::testing::AssertionFailure() << "estimate " << e.value << " +- " << e.std_error << " vs " << truth;
}

}  // namespace

TEST(Shadows, FactorIsHermitianWithUnitTrace) {
    std::mt19937_64 rng(1);
    for (int i = 0; i < 20; ++i) {
        auto u = sample_haar_unitary(rng);
        for (unsigned b = 0; b < 2; ++b) {
            auto f = rmkit::testing::to_eigen(shadow_factor(u, b));
            EXPECT_NEAR(std::abs(f.trace() - 1.0), 0.0, 1e-14);
            EXPECT_LT((f - f.adjoint()).norm(), 1e-14);
            // Eigenvalues of 3P - I are 2 and -1.
            EXPECT_NEAR(std::abs(f.determinant() + 2.0), 0.0, 1e-12);
        }
    }
}

TEST(Shadows, SnapshotHasUnitTrace) {
    auto ds = acquire(haar_random_state(3, 4), {EnsembleKind::kHaar, 3}, 5, 7, 11);
    for (const auto &r : ds.records()) {
        auto snap = build_snapshot(r);
        auto rho = snap.dense({0, 1, 2});
        EXPECT_NEAR(std::abs(rho.trace() - 1.0), 0.0, 1e-12);
        EXPECT_LT((rho - rho.adjoint()).norm(), 1e-12);
    }
}

TEST(Shadows, PlusStateXExpectationConverges) {
    auto plus = product_state({{M_PI / 2, 0.0}});
    for (auto kind : {EnsembleKind::kClifford, EnsembleKind::kHaar}) {
        auto ds = acquire(plus, {kind, 1}, 3000, 1, 8);
        auto e = predict_pauli(ds, PauliString::from_string("X"));
        EXPECT_TRUE(within_sigma(e, 1.0, 4));
        EXPECT_LT(e.std_error, 0.05);
    }
}

TEST(Shadows, GhzParityConverges) {
    auto ds = acquire(ghz_state(3), {EnsembleKind::kClifford, 3}, 6000, 1, 21);
    auto xxx = predict_pauli(ds, PauliString::from_string("XXX"));
    EXPECT_TRUE(within_sigma(xxx, 1.0, 4));
    auto yyx = predict_pauli(ds, PauliString::from_string("YYX"));
    EXPECT_TRUE(within_sigma(yyx, -1.0, 4));
    auto zzi = predict_pauli(ds, PauliString::from_string("ZZI"));
    EXPECT_TRUE(within_sigma(zzi, 1.0, 4));
}

TEST(Shadows, CompatibilityAndSnapshotPathsAgreeExactly) {
    auto ds = acquire(haar_random_state(4, 2), {EnsembleKind::kClifford, 4}, 400, 3, 5);
    for (const char *p : {"XIZY", "-ZZII", "IYIX", "XXXX"}) {
        auto pauli = PauliString::from_string(p);
        auto a = pauli_samples(ds, pauli, PredictionPath::kCompatibility);
        auto b = pauli_samples(ds, pauli, PredictionPath::kSnapshot);
        ASSERT_EQ(a.size(), b.size());
        for (std::size_t m = 0; m < a.size(); ++m) EXPECT_NEAR(a[m], b[m], 1e-12) << p << " m=" << m;
    }
}

TEST(Shadows, NoCompatibleSettingIsNoData) {
    auto ds = acquire(computational_state(3, 0), {EnsembleKind::kClifford, 3}, 2, 1, 5);
    // Two settings cannot cover every weight-3 Pauli.
    std::size_t failures = 0;
    for (const char *p : {"XXX", "YYY", "ZZZ", "XYZ", "ZYX"}) {
        try {
            predict_pauli(ds, PauliString::from_string(p));
        } catch (const NoDataError &e) {
            EXPECT_EQ(e.kind(), ErrorKind::kNoData);
            ++failures;
        }
    }
    EXPECT_GE(failures, 3u);
}

TEST(Shadows, PauliPredictionMatchesOracleOnRandomState) {
    State psi = haar_random_state(4, 77);
    auto ds = acquire(psi, {EnsembleKind::kClifford, 4}, 8000, 1, 3);
    for (const char *p : {"ZIII", "XYII", "IZXI", "ZZZI"}) {
        auto pauli = PauliString::from_string(p);
        EXPECT_TRUE(within_sigma(predict_pauli(ds, pauli), oracle_expectation(psi, pauli), 4.5)) << p;
    }
}

TEST(Shadows, ObservablePrediction) {
    State s = bell();
    auto ds = acquire(s, {EnsembleKind::kHaar, 2}, 4000, 2, 17);
    // The identity has zero variance under the shadow channel.
    auto id = predict_observable(ds, DenseMatrix::Identity(4, 4), {0, 1});
    EXPECT_NEAR(id.value, 1.0, 1e-12);
    EXPECT_NEAR(id.std_error, 0.0, 1e-12);
    auto fid = predict_observable(ds, reduced_density_matrix(s, {0, 1}), {0, 1});
    EXPECT_TRUE(within_sigma(fid, 1.0, 4));
    auto zz = predict_observable(ds, rmkit::testing::kron_letters("ZZ"), {0, 1});
    EXPECT_TRUE(within_sigma(zz, oracle_expectation(s, PauliString::from_string("ZZ")), 4));
}

TEST(Shadows, SubsystemStateIsUnitTraceHermitian) {
    auto ds = acquire(haar_random_state(3, 9), {EnsembleKind::kHaar, 3}, 200, 4, 1);
    auto rho = estimate_subsystem_state(ds, {2, 0});
    EXPECT_EQ(rho.rows(), 4);
    EXPECT_NEAR(std::abs(rho.trace() - 1.0), 0.0, 1e-12);
    EXPECT_LT((rho - rho.adjoint()).norm(), 1e-12);
}

TEST(Shadows, SubsystemCapIsEnforced) {
    auto ds = acquire(computational_state(10, 0), {EnsembleKind::kClifford, 10}, 3, 1, 1);
    try {
        estimate_subsystem_state(ds, all_qubits(9));
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::kSizeCap);
    }
}

TEST(Shadows, PurityMatchesOracle) {
    State pure = haar_random_state(3, 31);
    auto ds = acquire(pure, {EnsembleKind::kHaar, 3}, 1500, 4, 2);
    EXPECT_TRUE(within_sigma(purity_shadow(ds, {0, 1, 2}), 1.0, 4));
    EXPECT_TRUE(within_sigma(purity_shadow(ds, {0}), oracle_purity(pure, {0}), 4));
    State mixed = maximally_mixed_state(2);
    auto ds2 = acquire(mixed, {EnsembleKind::kClifford, 2}, 1500, 4, 2);
    EXPECT_TRUE(within_sigma(purity_shadow(ds2, {0, 1}), 0.25, 4));
}

TEST(Shadows, RenyiOfNonpositivePurityIsFlagged) {
    EstimateWithError p;
    p.value = -0.01;
    p.std_error = 0.02;
    auto s = renyi2_from_purity(p);
    EXPECT_TRUE(s.flagged);
    EXPECT_TRUE(std::isnan(s.value));
    p.value = 0.25;
    auto t = renyi2_from_purity(p);
    EXPECT_NEAR(t.value, 2.0, 1e-15);
    EXPECT_NEAR(t.std_error, 0.02 / (0.25 * std::log(2.0)), 1e-15);
}

TEST(Shadows, SecondMomentEqualsPurityEstimator) {
    auto ds = acquire(werner_state(0.7, 1), {EnsembleKind::kHaar, 2}, 300, 3, 4);
    auto p2 = pt_moment(ds, {0}, {1}, 2);
    auto purity = purity_shadow(ds, {0, 1});
    EXPECT_NEAR(p2.value, purity.value, 1e-10);
    auto p1 = pt_moment(ds, {0}, {1}, 1);
    EXPECT_NEAR(p1.value, 1.0, 1e-12);
}

TEST(Shadows, MulticopyOfIdentityPermutationIsOne) {
    auto ds = acquire(haar_random_state(2, 1), {EnsembleKind::kHaar, 2}, 60, 2, 4);
    CopyPermutation id{{0, 1, 2}, {0, 1}, {}};
    EXPECT_NEAR(multicopy_expect(ds, id).value, 1.0, 1e-10);
    auto swap = multicopy_expect(ds, cyclic_permutation(2, {0, 1}));
    EXPECT_NEAR(swap.value, purity_shadow(ds, {0, 1}).value, 1e-10);
}

TEST(Shadows, ThirdMomentMatchesOracle) {
    State s = werner_state(0.8, 1);
    auto ds = acquire(s, {EnsembleKind::kHaar, 2}, 1500, 4, 12);
    auto p3 = pt_moment(ds, {0}, {1}, 3);
    EXPECT_TRUE(within_sigma(p3, oracle_pt_moment(s, {0}, {1}, 3), 4));
}

TEST(Shadows, PptTestSeparatesBellFromProduct) {
    auto bell_ds = acquire(bell(), {EnsembleKind::kHaar, 2}, 1500, 4, 6);
    auto r = p3_ppt_test(bell_ds, {0}, {1});
    EXPECT_TRUE(r.entangled);
    EXPECT_GT(r.margin, 3.0);
    auto prod_ds = acquire(product_state({{0.3, 0.1}, {1.2, 2.0}}), {EnsembleKind::kHaar, 2}, 1500, 4, 6);
    auto q = p3_ppt_test(prod_ds, {0}, {1});
    EXPECT_FALSE(q.entangled);
}

TEST(Shadows, ReflectionOperatorSwapsMirroredBits) {
    auto r = reflection_operator(4);
    EXPECT_EQ(r(0b0001, 0b1000), Complex(1, 0));
    EXPECT_EQ(r(0b0110, 0b0110), Complex(1, 0));
    EXPECT_NEAR((r * r - DenseMatrix::Identity(16, 16)).norm(), 0.0, 1e-15);
}

TEST(Shadows, ReflectionEqualsObservableEstimator) {
    auto ds = acquire(haar_random_state(4, 8), {EnsembleKind::kHaar, 4}, 200, 3, 9);
    const Qubits window = {0, 1, 2, 3};
    auto z = reflection_invariant(ds, window);
    auto o = predict_observable(ds, reflection_operator(4), window);
    EXPECT_NEAR(z.z_r.value, o.value, 1e-10);
}

TEST(Shadows, ReflectionOfMaximallyMixedWindow) {
    State s = maximally_mixed_state(4);
    auto ds = acquire(s, {EnsembleKind::kClifford, 4}, 3000, 2, 3);
    auto z = reflection_invariant(ds, {0, 1, 2, 3});
    EXPECT_TRUE(within_sigma(z.z_r, 0.25, 4));
    EXPECT_NEAR(oracle_reflection(s, {0, 1, 2, 3}), 0.25, 1e-12);
}

TEST(Shadows, MirroredAcquisitionUsesPairEstimator) {
    State s = dimer_state(4, 1);
    AcquireOptions opts;
    opts.symmetric_window = Qubits{0, 1, 2, 3};
    for (auto kind : {EnsembleKind::kHaar, EnsembleKind::kClifford}) {
        auto ds = acquire(s, {kind, 4}, 2000, 1, 14, opts);
        auto z = reflection_invariant(ds, {0, 1, 2, 3});
        EXPECT_EQ(z.z_r.method, "mirrored_pairs");
        EXPECT_TRUE(within_sigma(z.z_r, oracle_reflection(s, {0, 1, 2, 3}), 4));
        // Shadow estimators would be biased across a shared pair.
        try {
            purity_shadow(ds, {1, 2});
            FAIL();
        } catch (const Error &e) {
            EXPECT_EQ(e.kind(), ErrorKind::kProtocol);
        }
    }
}

TEST(Shadows, TopologicalEntropyMatchesOracle) {
    State s = ghz_state(3);
    auto ds = acquire(s, {EnsembleKind::kClifford, 3}, 1000, 10, 4);
    auto hamming = topological_entropy(ds, {0}, {1}, {2});
    EXPECT_TRUE(within_sigma(hamming, oracle_topological_entropy(s, {0}, {1}, {2}), 4));
    auto shadow = topological_entropy(ds, {0}, {1}, {2}, PurityMethod::kShadow);
    EXPECT_TRUE(within_sigma(shadow, oracle_topological_entropy(s, {0}, {1}, {2}), 4));
}
