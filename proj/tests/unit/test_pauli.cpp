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

#include <random>

#include <gtest/gtest.h>

#include "rmkit/error.hpp"
#include "rmkit/pauli.hpp"
#include "test_util.hpp"

using namespace rmkit;
using rmkit::testing::kron_letters;

namespace {

PauliString random_pauli(unsigned n, std::mt19937_64 &rng) {
    std::uint64_t x = rng() & low_mask(n), z = rng() & low_mask(n);
    return PauliString(n, x, z, static_cast<unsigned>(rng() % 4));
}

Eigen::MatrixXcd dense(const PauliString &p) {
    return p.coeff() * kron_letters(p.letters());
}

}  // namespace

TEST(PauliString, ParseAndPrint) {
    auto p = PauliString::from_string("-iXIZY");
    EXPECT_EQ(p.n_qubits(), 4u);
    EXPECT_EQ(p.phase(), 3u);
    EXPECT_EQ(p.letter(0), PauliLetter::X);
    EXPECT_EQ(p.letter(3), PauliLetter::Y);
    EXPECT_EQ(p.weight(), 3u);
    EXPECT_EQ(p.str(), "-iXIZY");
    EXPECT_EQ(PauliString::from_string("X_Z").str(), "+XIZ");
    EXPECT_EQ(PauliString::from_string("+iZ").phase(), 1u);
    EXPECT_THROW(PauliString::from_string("XQ"), Error);
    EXPECT_THROW(PauliString(3, 0b1000, 0), Error);
}

TEST(PauliString, YIsXZWithPhase) {
    auto y = PauliString::from_string("Y");
    EXPECT_EQ(y.x_mask(), 1u);
    EXPECT_EQ(y.z_mask(), 1u);
    EXPECT_EQ(y.phase(), 0u);
    EXPECT_TRUE((to_matrix(y) - kron_letters("Y")).norm() < 1e-14);
}

TEST(PauliString, ToMatrixMatchesKronecker) {
    for (const char *s : {"XIZ", "YYX", "ZIIY", "-XY", "+iZZ"}) {
        auto p = PauliString::from_string(s);
        EXPECT_LT((to_matrix(p) - dense(p)).norm(), 1e-13) << s;
    }
}

TEST(PauliString, MultiplyMatchesDenseProduct) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 300; ++trial) {
        unsigned n = 1 + trial % 4;
        auto a = random_pauli(n, rng), b = random_pauli(n, rng);
        auto c = multiply(a, b);
        EXPECT_LT((dense(c) - dense(a) * dense(b)).norm(), 1e-12) << a.str() << " * " << b.str();
    }
}

TEST(PauliString, KnownProducts) {
    EXPECT_EQ(multiply(PauliString::from_string("X"), PauliString::from_string("Y")).str(), "+iZ");
    EXPECT_EQ(multiply(PauliString::from_string("Y"), PauliString::from_string("X")).str(), "-iZ");
    EXPECT_EQ(multiply(PauliString::from_string("XX"), PauliString::from_string("ZZ")).str(), "-YY");
}

TEST(PauliString, CommutesMatchesDense) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 300; ++trial) {
        unsigned n = 1 + trial % 5;
        auto a = random_pauli(n, rng), b = random_pauli(n, rng);
        Eigen::MatrixXcd comm = dense(a) * dense(b) - dense(b) * dense(a);
        EXPECT_EQ(commutes(a, b), comm.norm() < 1e-12);
    }
}

TEST(PauliString, CommutatorConvention) {
    auto c = commutator(PauliString::from_string("X"), PauliString::from_string("Y"));
    ASSERT_TRUE(c.has_value());
    EXPECT_EQ(c->str(), "-Z");
    EXPECT_FALSE(commutator(PauliString::from_string("XX"), PauliString::from_string("ZZ")).has_value());
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        auto a = random_pauli(3, rng).unsigned_part(), b = random_pauli(3, rng).unsigned_part();
        auto c2 = commutator(a, b);
        if (!c2) continue;
        Eigen::MatrixXcd expected = Complex(0, 0.5) * (dense(a) * dense(b) - dense(b) * dense(a));
        EXPECT_LT((dense(*c2) - expected).norm(), 1e-12);
        EXPECT_TRUE(c2->is_hermitian());
    }
}

TEST(PauliString, RealSign) {
    EXPECT_EQ(PauliString::from_string("-XZ").real_sign(), -1);
    EXPECT_EQ(PauliString::from_string("XZ").real_sign(), 1);
    EXPECT_THROW(PauliString::from_string("iXZ").real_sign(), Error);
}

TEST(PauliString, Restricted) {
    auto p = PauliString::from_string("-XYZI");
    EXPECT_EQ(p.restricted({2, 0}).str(), "-ZX");
}

TEST(BasisString, Compatibility) {
    auto b = BasisString::from_string("XYZ");
    EXPECT_TRUE(is_compatible(PauliString::from_string("XII"), b));
    EXPECT_TRUE(is_compatible(PauliString::from_string("IYZ"), b));
    EXPECT_TRUE(is_compatible(PauliString::from_string("III"), b));
    EXPECT_FALSE(is_compatible(PauliString::from_string("ZII"), b));
    EXPECT_FALSE(is_compatible(PauliString::from_string("IXI"), b));
}

TEST(BasisString, EigenvalueOnBitstring) {
    auto b = BasisString::from_string("ZZX");
    auto p = PauliString::from_string("ZIX");
    EXPECT_EQ(eigenvalue_on_bitstring(p, b, 0b000), 1);
    EXPECT_EQ(eigenvalue_on_bitstring(p, b, 0b001), -1);
    EXPECT_EQ(eigenvalue_on_bitstring(p, b, 0b101), 1);
    EXPECT_EQ(eigenvalue_on_bitstring(p, b, 0b010), 1);
    EXPECT_EQ(eigenvalue_on_bitstring(p.negated(), b, 0b010), -1);
    // A negative basis sign flips the readout on that qubit.
    auto neg = BasisString::from_string("-ZZX");
    EXPECT_EQ(neg.negative_mask(), 1u);
    EXPECT_EQ(eigenvalue_on_bitstring(p, neg, 0b000), -1);
    EXPECT_THROW(eigenvalue_on_bitstring(PauliString::from_string("XII"), b, 0), Error);
}

TEST(PauliEnumeration, CountsByWeight) {
    // sum_{w=1}^{2} C(6, w) 3^w = 18 + 135
    auto all = all_paulis_up_to_weight(6, 2);
    EXPECT_EQ(all.size(), 153u);
    for (std::size_t i = 1; i < all.size(); ++i) EXPECT_LE(all[i - 1].weight(), all[i].weight());
    EXPECT_EQ(all_paulis_up_to_weight(3, 3).size(), 63u);
}
