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
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "rmkit/error.hpp"
#include "rmkit/hamlearn.hpp"

using namespace rmkit;

namespace {

HamiltonianSpec tfim(unsigned n, double j, double h) {
    return build_tfim(std::vector<double>(n - 1, j), std::vector<double>(n, h));
}

AnsatzBasis tfim_ansatz(const HamiltonianSpec &h) {
    std::vector<PauliString> terms;
    for (const auto &t : h.terms()) terms.push_back(t.pauli);
    return AnsatzBasis::from_terms(terms);
}

Eigen::MatrixXd planted(std::size_t n, const std::vector<Eigen::VectorXd> &null, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    Eigen::MatrixXd a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a(i, j) = g(rng);
    a = a - a.transpose().eval();
    Eigen::MatrixXd p = Eigen::MatrixXd::Identity(n, n);
    for (const auto &v : null) p -= v * v.transpose();
    return p * a * p;
}

}  // namespace

TEST(Ansatz, ChainEnumeratesEveryShortRangeString) {
    auto b = AnsatzBasis::chain(4, 2, 1);
    // 4 sites x 3 letters + 3 bonds x 9 letter pairs.
    EXPECT_EQ(b.size(), 12u + 27u);
    std::set<std::string> seen;
    for (const auto &t : b.terms) {
        EXPECT_LE(t.weight(), 2u);
        EXPECT_FALSE(t.is_identity());
        EXPECT_TRUE(seen.insert(t.letters()).second);
    }
    auto wide = AnsatzBasis::chain(4, 2, 3);
    EXPECT_EQ(wide.size(), 12u + 6u * 9u);
}

TEST(Ansatz, ExplicitListIsValidated) {
    EXPECT_THROW(AnsatzBasis::from_terms({PauliString::from_string("XI"), PauliString::from_string("-XI")}), Error);
    EXPECT_THROW(AnsatzBasis::from_terms({PauliString::from_string("II")}), Error);
    auto b = AnsatzBasis::from_terms({PauliString::from_string("-ZZI"), PauliString::from_string("XII")});
    EXPECT_EQ(b.locality, 2u);
    EXPECT_EQ(b.terms[0].str(), "+ZZI");
}

TEST(HamLearn, CommutingPairGivesZero) {
    auto b = AnsatzBasis::from_terms({PauliString::from_string("ZZ"), PauliString::from_string("XX")});
    auto k = build_K(b, exact_provider(State(haar_random_state(2, 4)))).k;
    EXPECT_EQ(k(0, 1), 0.0);
    EXPECT_EQ(k(1, 0), 0.0);
}

TEST(HamLearn, KIsExactlyAntisymmetric) {
    auto b = AnsatzBasis::chain(3, 2, 1);
    auto k = build_K(b, exact_provider(State(random_mixed_state(3, 8)))).k;
    EXPECT_EQ((k + k.transpose()).cwiseAbs().maxCoeff(), 0.0);
    for (Eigen::Index i = 0; i < k.rows(); ++i) EXPECT_EQ(k(i, i), 0.0);
}

TEST(HamLearn, TrueCouplingsLieInKernel) {
    auto h = tfim(3, 1.0, 0.8);
    State gs = eigenstate(h, 0);
    auto b = AnsatzBasis::chain(3, 2, 1);
    auto k = build_K(b, exact_provider(gs)).k;
    EXPECT_LT((k * couplings_on_basis(h, b)).norm(), 1e-8);
    // Any steady state works, not only the ground state.
    State gibbs = gibbs_state(h, 0.7);
    auto kg = build_K(b, exact_provider(gibbs)).k;
    EXPECT_LT((kg * couplings_on_basis(h, b)).norm(), 1e-8);
}

TEST(HamLearn, PlantedNullVectorIsRecovered) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    Eigen::VectorXd c(7);
    for (auto &x : c) x = g(rng);
    c.normalize();
    auto r = recover(planted(7, {c}, 9));
    EXPECT_FALSE(r.flagged);
    EXPECT_GT(cosine_similarity(r.c, c), 1 - 1e-12);
    EXPECT_NEAR(r.c.norm(), 1.0, 1e-12);
    Eigen::Index arg;
    r.c.cwiseAbs().maxCoeff(&arg);
    EXPECT_GT(r.c(arg), 0.0);
}

TEST(HamLearn, DegenerateKernelIsFlagged) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(8), b = Eigen::VectorXd::Zero(8);
    a(0) = 1;
    b(3) = 1;
    auto r = recover(planted(8, {a, b}, 2));
    EXPECT_TRUE(r.flagged);
    EXPECT_GE(r.gap, 1.0);
}

TEST(HamLearn, TfimGroundStateWithConstraints) {
    auto h = tfim(5, 1.0, 0.7);
    State gs = eigenstate(h, 0);
    auto basis = tfim_ansatz(h);
    auto constraints = AnsatzBasis::chain(5, 2, 1).terms;
    auto k = build_constraint_matrix(constraints, basis, exact_provider(gs));
    auto r = recover(k.k);
    EXPECT_FALSE(r.flagged);
    EXPECT_GT(cosine_similarity(r.c, couplings_on_basis(h, basis)), 0.999);
}

TEST(HamLearn, SquareKOnRealTermsVanishesForRealStates) {
    // i[W_l, W_m] is imaginary-antisymmetric for real W, so its expectation in
    // a real state is zero and the square K carries no information.
    auto h = tfim(4, 1.0, 0.7);
    auto k = build_K(tfim_ansatz(h), exact_provider(State(eigenstate(h, 0)))).k;
    EXPECT_LT(k.cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_TRUE(recover(k).flagged);
}

TEST(HamLearn, RecoveryIsInvariantUnderBasisOrder) {
    auto h = tfim(4, 1.0, 0.6);
    State gs = eigenstate(h, 0);
    auto basis = tfim_ansatz(h);
    auto constraints = AnsatzBasis::chain(4, 2, 1).terms;
    auto r1 = recover(build_constraint_matrix(constraints, basis, exact_provider(gs)).k);
    auto reversed = basis;
    std::reverse(reversed.terms.begin(), reversed.terms.end());
    auto r2 = recover(build_constraint_matrix(constraints, reversed, exact_provider(gs)).k);
    const auto n = static_cast<Eigen::Index>(basis.size());
    for (Eigen::Index i = 0; i < n; ++i) EXPECT_NEAR(r1.c(i), r2.c(n - 1 - i), 1e-9);
}

TEST(HamLearn, MaximallyMixedInputIsFlagged) {
    auto ds = acquire(maximally_mixed_state(3), {EnsembleKind::kClifford, 3}, 2000, 1, 4);
    auto r = learn_from_dataset(ds, AnsatzBasis::chain(3, 2, 1));
    EXPECT_TRUE(r.flagged);
}

TEST(HamLearn, MissingCommutatorsAreListed) {
    auto ds = acquire(computational_state(3, 0), {EnsembleKind::kClifford, 3}, 2, 1, 4);
    auto r = learn_from_dataset(ds, AnsatzBasis::chain(3, 2, 2));
    EXPECT_FALSE(r.missing.empty());
    EXPECT_TRUE(r.flagged);
}
