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

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rmkit/types.hpp"

namespace rmkit {

/// Hard limit on register width for bitmask-encoded objects.
inline constexpr unsigned kMaxQubits = 64;
/// Largest register for which dense Pauli materialization is allowed.
inline constexpr unsigned kMaxDensePauliQubits = 12;

enum class PauliLetter : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

char to_char(PauliLetter p);

inline std::uint64_t low_mask(unsigned n) { return n >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1; }

/// N-qubit Pauli operator i^phase * P_0 (x) ... (x) P_{N-1}, stored as a
/// symplectic (x, z) bit pair per qubit. Qubit q lives in bit q; qubit 0 is
/// the leftmost character of the text form.
class PauliString {
  public:
    PauliString() = default;
    /// Identity on n qubits.
    explicit PauliString(unsigned n_qubits);
    PauliString(unsigned n_qubits, std::uint64_t x_mask, std::uint64_t z_mask, unsigned phase = 0);

    /// Parses "XIZY", "+XIZY", "-XIZY", "+iXZ", "-iXZ". '_' is accepted for I.
    static PauliString from_string(std::string_view text);
    /// Single-site operator on an otherwise identity register.
    static PauliString single(unsigned n_qubits, unsigned qubit, PauliLetter letter);
    static PauliString from_letters(const std::vector<PauliLetter> &letters);

    unsigned n_qubits() const { return n_; }
    std::uint64_t x_mask() const { return x_; }
    std::uint64_t z_mask() const { return z_; }
    /// Exponent of i in the coefficient, in [0, 4).
    unsigned phase() const { return phase_; }
    Complex coeff() const;
    /// +1 / -1 for Hermitian strings; throws when the coefficient is imaginary.
    int real_sign() const;
    bool is_hermitian() const { return (phase_ & 1u) == 0; }

    std::uint64_t support() const { return x_ | z_; }
    unsigned weight() const;
    bool is_identity() const { return support() == 0; }
    PauliLetter letter(unsigned qubit) const;

    PauliString with_phase(unsigned phase) const { return {n_, x_, z_, phase}; }
    PauliString negated() const { return with_phase(phase_ + 2); }
    /// Same letters with coefficient +1.
    PauliString unsigned_part() const { return with_phase(0); }

    /// Text form; the sign prefix is always written ("+XIZ", "-iYY").
    std::string str() const;
    /// Letters only, no sign.
    std::string letters() const;

    /// Keeps only the listed qubits, in the order given.
    PauliString restricted(const std::vector<unsigned> &qubits) const;

    bool operator==(const PauliString &) const = default;

  private:
    unsigned n_ = 0;
    std::uint64_t x_ = 0;
    std::uint64_t z_ = 0;
    unsigned phase_ = 0;
};

/// Per-qubit measured basis {X, Y, Z} with an optional sign per qubit: the
/// observable actually read out on qubit q is sign_q * letter_q.
class BasisString {
  public:
    BasisString() = default;
    BasisString(std::vector<PauliLetter> letters, std::uint64_t negative_mask = 0);
    static BasisString from_string(std::string_view text);

    unsigned n_qubits() const { return static_cast<unsigned>(letters_.size()); }
    PauliLetter letter(unsigned q) const { return letters_[q]; }
    const std::vector<PauliLetter> &letters() const { return letters_; }
    std::uint64_t negative_mask() const { return negative_; }
    std::uint64_t x_mask() const { return x_; }
    std::uint64_t z_mask() const { return z_; }
    std::string str() const;

    bool operator==(const BasisString &) const = default;

  private:
    std::vector<PauliLetter> letters_;
    std::uint64_t negative_ = 0;
    std::uint64_t x_ = 0;
    std::uint64_t z_ = 0;
};

/// True iff every non-identity site of p matches the basis letter there.
bool is_compatible(const PauliString &p, const BasisString &b);

/// Exact product a*b with phase tracking.
PauliString multiply(const PauliString &a, const PauliString &b);

bool commutes(const PauliString &a, const PauliString &b);

/// i[a, b] / 2 when a and b anticommute (equal to i*a*b), nothing when they commute.
std::optional<PauliString> commutator(const PauliString &a, const PauliString &b);

/// +-1 eigenvalue of a Hermitian p read off from outcome bits measured in basis b.
/// Bit q of `bits` is the outcome on qubit q. Throws if p and b are incompatible.
int eigenvalue_on_bitstring(const PauliString &p, const BasisString &b, std::uint64_t bits);

/// Dense 2^N x 2^N matrix; basis index bit q is qubit q.
DenseMatrix to_matrix(const PauliString &p);

/// All 4^n - 1 non-identity Pauli strings on n qubits whose weight is <= max_weight.
std::vector<PauliString> all_paulis_up_to_weight(unsigned n, unsigned max_weight);

}  // namespace rmkit
