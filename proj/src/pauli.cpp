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

#include "rmkit/pauli.hpp"

#include <bit>

#include "rmkit/error.hpp"

namespace rmkit {

namespace {

PauliLetter letter_from_bits(bool x, bool z) {
    if (x) {
        return z ? PauliLetter::Y : PauliLetter::X;
    }
    return z ? PauliLetter::Z : PauliLetter::I;
}

PauliLetter parse_letter(char c) {
    switch (c) {
        case 'I':
        case '_':
            return PauliLetter::I;
        case 'X':
            return PauliLetter::X;
        case 'Y':
            return PauliLetter::Y;
        case 'Z':
            return PauliLetter::Z;
        default:
            throw Error(ErrorKind::kInvalidArgument, std::string("invalid Pauli letter '") + c + "'");
    }
}

const Complex kPhases[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};

}  // namespace

char to_char(PauliLetter p) { return "IXYZ"[static_cast<int>(p)]; }

PauliString::PauliString(unsigned n_qubits) : PauliString(n_qubits, 0, 0, 0) {}

PauliString::PauliString(unsigned n_qubits, std::uint64_t x_mask, std::uint64_t z_mask, unsigned phase)
    : n_(n_qubits), x_(x_mask), z_(z_mask), phase_(phase & 3u) {
    require(n_qubits <= kMaxQubits, "PauliString: at most 64 qubits supported");
    require(((x_mask | z_mask) & ~low_mask(n_qubits)) == 0, "PauliString: mask bits set beyond n_qubits");
}

PauliString PauliString::from_string(std::string_view text) {
    unsigned phase = 0;
    std::size_t pos = 0;
    if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
        phase = text[pos] == '-' ? 2 : 0;
        ++pos;
    }
    if (pos < text.size() && text[pos] == 'i') {
        phase += 1;
        ++pos;
    }
    std::vector<PauliLetter> letters;
    for (; pos < text.size(); ++pos) {
        letters.push_back(parse_letter(text[pos]));
    }
    require(!letters.empty(), "PauliString: empty string");
    return from_letters(letters).with_phase(phase);
}

PauliString PauliString::single(unsigned n_qubits, unsigned qubit, PauliLetter letter) {
    require(qubit < n_qubits, "PauliString::single: qubit out of range");
    std::uint64_t bit = std::uint64_t{1} << qubit;
    bool x = letter == PauliLetter::X || letter == PauliLetter::Y;
    bool z = letter == PauliLetter::Z || letter == PauliLetter::Y;
    return {n_qubits, x ? bit : 0, z ? bit : 0, 0};
}

PauliString PauliString::from_letters(const std::vector<PauliLetter> &letters) {
    require(letters.size() <= kMaxQubits, "PauliString: at most 64 qubits supported");
    std::uint64_t x = 0, z = 0;
    for (std::size_t q = 0; q < letters.size(); ++q) {
        std::uint64_t bit = std::uint64_t{1} << q;
        if (letters[q] == PauliLetter::X || letters[q] == PauliLetter::Y) x |= bit;
        if (letters[q] == PauliLetter::Z || letters[q] == PauliLetter::Y) z |= bit;
    }
    return {static_cast<unsigned>(letters.size()), x, z, 0};
}

Complex PauliString::coeff() const { return kPhases[phase_]; }

int PauliString::real_sign() const {
    require(is_hermitian(), "PauliString: coefficient is imaginary");
    return phase_ == 0 ? 1 : -1;
}

unsigned PauliString::weight() const { return static_cast<unsigned>(std::popcount(support())); }

PauliLetter PauliString::letter(unsigned qubit) const {
    return letter_from_bits((x_ >> qubit) & 1u, (z_ >> qubit) & 1u);
}

std::string PauliString::letters() const {
    std::string out(n_, 'I');
    for (unsigned q = 0; q < n_; ++q) out[q] = to_char(letter(q));
    return out;
}

std::string PauliString::str() const {
    static const char *kPrefix[4] = {"+", "+i", "-", "-i"};
    return kPrefix[phase_] + letters();
}

PauliString PauliString::restricted(const std::vector<unsigned> &qubits) const {
    std::uint64_t x = 0, z = 0;
    for (std::size_t i = 0; i < qubits.size(); ++i) {
        require(qubits[i] < n_, "PauliString::restricted: qubit out of range");
        x |= ((x_ >> qubits[i]) & 1u) << i;
        z |= ((z_ >> qubits[i]) & 1u) << i;
    }
    return {static_cast<unsigned>(qubits.size()), x, z, phase_};
}

BasisString::BasisString(std::vector<PauliLetter> letters, std::uint64_t negative_mask)
    : letters_(std::move(letters)), negative_(negative_mask) {
    require(letters_.size() <= kMaxQubits, "BasisString: at most 64 qubits supported");
    require((negative_mask & ~low_mask(n_qubits())) == 0, "BasisString: sign bits beyond n_qubits");
    for (std::size_t q = 0; q < letters_.size(); ++q) {
        require(letters_[q] != PauliLetter::I, "BasisString: identity is not a measurement basis");
        std::uint64_t bit = std::uint64_t{1} << q;
        if (letters_[q] != PauliLetter::Z) x_ |= bit;
        if (letters_[q] != PauliLetter::X) z_ |= bit;
    }
}

BasisString BasisString::from_string(std::string_view text) {
    std::vector<PauliLetter> letters;
    std::uint64_t neg = 0;
    bool pending_minus = false;
    for (char c : text) {
        if (c == '-') {
            pending_minus = true;
            continue;
        }
        if (c == '+') continue;
        if (pending_minus) neg |= std::uint64_t{1} << letters.size();
        pending_minus = false;
        letters.push_back(parse_letter(c));
    }
    return BasisString(std::move(letters), neg);
}

std::string BasisString::str() const {
    std::string out;
    for (unsigned q = 0; q < n_qubits(); ++q) {
        if ((negative_ >> q) & 1u) out += '-';
        out += to_char(letters_[q]);
    }
    return out;
}

bool is_compatible(const PauliString &p, const BasisString &b) {
    require(p.n_qubits() == b.n_qubits(), "is_compatible: qubit count mismatch");
    return (((p.x_mask() ^ b.x_mask()) | (p.z_mask() ^ b.z_mask())) & p.support()) == 0;
}

PauliString multiply(const PauliString &a, const PauliString &b) {
    require(a.n_qubits() == b.n_qubits(), "multiply: qubit count mismatch");
    const std::uint64_t x1 = a.x_mask(), z1 = a.z_mask(), x2 = b.x_mask(), z2 = b.z_mask();
    // Per-site phase i^{+1} for XY, YZ, ZX and i^{-1} for YX, ZY, XZ.
    std::uint64_t plus = (x1 & ~z1 & x2 & z2) | (x1 & z1 & ~x2 & z2) | (~x1 & z1 & x2 & ~z2);
    std::uint64_t minus = (x1 & z1 & x2 & ~z2) | (~x1 & z1 & x2 & z2) | (x1 & ~z1 & ~x2 & z2);
    int phase = static_cast<int>(a.phase() + b.phase()) + std::popcount(plus) - std::popcount(minus);
    return {a.n_qubits(), x1 ^ x2, z1 ^ z2, static_cast<unsigned>(((phase % 4) + 4) % 4)};
}

bool commutes(const PauliString &a, const PauliString &b) {
    require(a.n_qubits() == b.n_qubits(), "commutes: qubit count mismatch");
    return (std::popcount((a.x_mask() & b.z_mask()) ^ (a.z_mask() & b.x_mask())) & 1) == 0;
}

std::optional<PauliString> commutator(const PauliString &a, const PauliString &b) {
    if (commutes(a, b)) return std::nullopt;
    // ab = -ba, so i[a,b]/2 = i*ab.
    PauliString ab = multiply(a, b);
    return ab.with_phase(ab.phase() + 1);
}

int eigenvalue_on_bitstring(const PauliString &p, const BasisString &b, std::uint64_t bits) {
    if (!is_compatible(p, b)) {
        throw Error(ErrorKind::kInvalidArgument, "eigenvalue_on_bitstring: " + p.str() + " incompatible with basis " + b.str());
    }
    std::uint64_t flips = (bits ^ b.negative_mask()) & p.support();
    int sign = (std::popcount(flips) & 1) ? -1 : 1;
    return sign * p.real_sign();
}

DenseMatrix to_matrix(const PauliString &p) {
    if (p.n_qubits() > kMaxDensePauliQubits) {
        fail(ErrorKind::kSizeCap, "to_matrix: at most 12 qubits can be materialized");
    }
    const std::size_t dim = std::size_t{1} << p.n_qubits();
    DenseMatrix m = DenseMatrix::Zero(dim, dim);
    // Per site P(x,z) = i^{xz} X^x Z^z, so <r|P|c> = i^{phase + |x&z|} (-1)^{|z&c|} [r = c^x].
    const unsigned base = p.phase() + static_cast<unsigned>(std::popcount(p.x_mask() & p.z_mask()));
    for (std::size_t c = 0; c < dim; ++c) {
        std::size_t r = c ^ p.x_mask();
        unsigned ph = base + ((std::popcount(p.z_mask() & c) & 1) ? 2u : 0u);
        m(r, c) = kPhases[ph & 3u];
    }
    return m;
}

std::vector<PauliString> all_paulis_up_to_weight(unsigned n, unsigned max_weight) {
    require(n <= kMaxQubits, "all_paulis_up_to_weight: too many qubits");
    std::vector<PauliString> out;
    // Enumerate supports in increasing weight, then letters over the support.
    std::vector<unsigned> support;
    auto emit_support = [&](const std::vector<unsigned> &sites) {
        std::size_t count = 1;
        for (std::size_t i = 0; i < sites.size(); ++i) count *= 3;
        for (std::size_t code = 0; code < count; ++code) {
            std::vector<PauliLetter> letters(n, PauliLetter::I);
            std::size_t c = code;
            for (unsigned s : sites) {
                letters[s] = static_cast<PauliLetter>(1 + c % 3);
                c /= 3;
            }
            out.push_back(PauliString::from_letters(letters));
        }
    };
    auto recurse = [&](auto &&self, unsigned start, unsigned remaining) -> void {
        if (remaining == 0) {
            emit_support(support);
            return;
        }
        for (unsigned q = start; q < n; ++q) {
            support.push_back(q);
            self(self, q + 1, remaining - 1);
            support.pop_back();
        }
    };
    for (unsigned w = 1; w <= std::min(max_weight, n); ++w) recurse(recurse, 0, w);
    return out;
}

}  // namespace rmkit
