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

#include "rmkit/ensemble.hpp"

#include <cmath>
#include <deque>

#include "rmkit/error.hpp"
#include "rmkit/parallel.hpp"

namespace rmkit {

namespace {

Mat2 fix_phase(Mat2 u) {
    for (const Complex &z : u) {
        if (std::abs(z) > 1e-9) {
            Complex phase = std::conj(z) / std::abs(z);
            for (auto &w : u) {
                w *= phase;
                if (std::abs(w.real()) < 1e-15) w.real(0.0);
                if (std::abs(w.imag()) < 1e-15) w.imag(0.0);
            }
            return u;
        }
    }
    return u;
}

std::pair<PauliLetter, bool> measured_observable(const Mat2 &u) {
    const Mat2 z = {Complex{1, 0}, Complex{0, 0}, Complex{0, 0}, Complex{-1, 0}};
    Mat2 m = matmul(adjoint(u), matmul(z, u));
    // m = s * (x X + y Y + z Z) with exactly one of x, y, z nonzero.
    double xc = m[1].real();
    double yc = -m[1].imag();
    double zc = m[0].real();
    if (std::abs(xc) > 0.5) return {PauliLetter::X, xc < 0};
    if (std::abs(yc) > 0.5) return {PauliLetter::Y, yc < 0};
    return {PauliLetter::Z, zc < 0};
}

std::array<CliffordElement, 24> build_clifford_table() {
    const double s = M_SQRT1_2;
    const Mat2 h = {Complex{s, 0}, Complex{s, 0}, Complex{s, 0}, Complex{-s, 0}};
    const Mat2 sg = {Complex{1, 0}, Complex{0, 0}, Complex{0, 0}, Complex{0, 1}};
    std::vector<Mat2> found{kIdentity2};
    std::deque<Mat2> frontier{kIdentity2};
    // Breadth-first closure under {H, S}; order is fixed by the generator order.
    while (!frontier.empty()) {
        Mat2 cur = frontier.front();
        frontier.pop_front();
        for (const Mat2 *g : {&h, &sg}) {
            Mat2 next = fix_phase(matmul(*g, cur));
            bool seen = false;
            for (const auto &f : found) {
                if (max_abs_diff(f, next) < 1e-9) {
                    seen = true;
                    break;
                }
            }
            if (!seen) {
                found.push_back(next);
                frontier.push_back(next);
            }
        }
    }
    if (found.size() != 24) throw Error(ErrorKind::kInvalidArgument, "Clifford closure did not produce 24 elements");
    std::array<CliffordElement, 24> table{};
    for (std::size_t i = 0; i < 24; ++i) {
        auto [letter, negative] = measured_observable(found[i]);
        table[i] = {found[i], letter, negative};
    }
    return table;
}

}  // namespace

std::string_view ensemble_name(EnsembleKind kind) { return kind == EnsembleKind::kHaar ? "haar" : "clifford"; }

EnsembleKind parse_ensemble(std::string_view name) {
    if (name == "haar" || name == "single_qubit_haar") return EnsembleKind::kHaar;
    if (name == "clifford" || name == "single_qubit_clifford") return EnsembleKind::kClifford;
    throw Error(ErrorKind::kConfig, "unknown ensemble '" + std::string(name) + "'");
}

const std::array<CliffordElement, 24> &clifford_table() {
    static const std::array<CliffordElement, 24> table = build_clifford_table();
    return table;
}

LocalUnitarySetting LocalUnitarySetting::restricted(const Qubits &qubits) const {
    LocalUnitarySetting out;
    out.index = index;
    out.kind = kind;
    out.seed = seed;
    std::vector<PauliLetter> letters;
    std::uint64_t neg = 0;
    for (std::size_t i = 0; i < qubits.size(); ++i) {
        const unsigned q = qubits[i];
        require(q < n_qubits(), "LocalUnitarySetting::restricted: qubit out of range");
        out.unitaries.push_back(unitaries[q]);
        if (!clifford_ids.empty()) out.clifford_ids.push_back(clifford_ids[q]);
        if (basis) {
            letters.push_back(basis->letter(q));
            if ((basis->negative_mask() >> q) & 1u) neg |= std::uint64_t{1} << i;
        }
    }
    if (basis) out.basis = BasisString(std::move(letters), neg);
    return out;
}

LocalUnitarySetting clifford_setting(std::size_t index, std::uint64_t seed, const std::vector<std::uint8_t> &ids) {
    const auto &table = clifford_table();
    LocalUnitarySetting s;
    s.index = index;
    s.kind = EnsembleKind::kClifford;
    s.seed = seed;
    s.clifford_ids = ids;
    std::vector<PauliLetter> letters;
    std::uint64_t neg = 0;
    for (std::size_t q = 0; q < ids.size(); ++q) {
        require(ids[q] < 24, "clifford_setting: table index out of range");
        const auto &el = table[ids[q]];
        s.unitaries.push_back(el.matrix);
        letters.push_back(el.measured);
        if (el.negative) neg |= std::uint64_t{1} << q;
    }
    s.basis = BasisString(std::move(letters), neg);
    return s;
}

Mat2 sample_haar_unitary(std::mt19937_64 &rng) {
    std::normal_distribution<double> gauss(0.0, M_SQRT1_2);
    Complex g[4];
    for (auto &z : g) {
        double re = gauss(rng);
        double im = gauss(rng);
        z = Complex(re, im);
    }
    // Columns c0 = (g0, g2), c1 = (g1, g3); Gram-Schmidt gives Q with R_ii > 0,
    // which is the phase fix that makes Q Haar distributed.
    double n0 = std::sqrt(std::norm(g[0]) + std::norm(g[2]));
    Complex q00 = g[0] / n0, q10 = g[2] / n0;
    Complex proj = std::conj(q00) * g[1] + std::conj(q10) * g[3];
    Complex v0 = g[1] - proj * q00, v1 = g[3] - proj * q10;
    double n1 = std::sqrt(std::norm(v0) + std::norm(v1));
    return {q00, v0 / n1, q10, v1 / n1};
}

LocalUnitarySetting sample_setting(const EnsembleSpec &e, std::uint64_t master_seed, std::size_t m) {
    const std::uint64_t seed = mix_seed(master_seed, m);
    std::mt19937_64 rng(seed);
    if (e.kind == EnsembleKind::kClifford) {
        std::uniform_int_distribution<int> pick(0, 23);
        std::vector<std::uint8_t> ids(e.n_qubits);
        for (auto &id : ids) id = static_cast<std::uint8_t>(pick(rng));
        return clifford_setting(m, seed, ids);
    }
    LocalUnitarySetting s;
    s.index = m;
    s.kind = EnsembleKind::kHaar;
    s.seed = seed;
    s.unitaries.reserve(e.n_qubits);
    for (unsigned q = 0; q < e.n_qubits; ++q) s.unitaries.push_back(sample_haar_unitary(rng));
    return s;
}

LocalUnitarySetting symmetric_setting(const EnsembleSpec &e, const Qubits &window, std::uint64_t master_seed,
                                      std::size_t m) {
    if (window.empty() || window.size() % 2 != 0) {
        throw Error(ErrorKind::kInvalidArgument, "symmetric_setting: window must have even, nonzero size");
    }
    const std::uint64_t seed = mix_seed(master_seed, m);
    std::mt19937_64 rng(seed);
    const std::size_t half = window.size() / 2;
    if (e.kind == EnsembleKind::kClifford) {
        std::uniform_int_distribution<int> pick(0, 23);
        std::vector<std::uint8_t> ids(e.n_qubits, 0);  // table entry 0 is the identity
        for (std::size_t i = 0; i < half; ++i) {
            auto id = static_cast<std::uint8_t>(pick(rng));
            require(window[i] < e.n_qubits && window[window.size() - 1 - i] < e.n_qubits,
                    "symmetric_setting: window qubit out of range");
            ids[window[i]] = id;
            ids[window[window.size() - 1 - i]] = id;
        }
        return clifford_setting(m, seed, ids);
    }
    LocalUnitarySetting s;
    s.index = m;
    s.kind = EnsembleKind::kHaar;
    s.seed = seed;
    s.unitaries.assign(e.n_qubits, kIdentity2);
    for (std::size_t i = 0; i < half; ++i) {
        Mat2 u = sample_haar_unitary(rng);
        require(window[i] < e.n_qubits && window[window.size() - 1 - i] < e.n_qubits,
                "symmetric_setting: window qubit out of range");
        s.unitaries[window[i]] = u;
        s.unitaries[window[window.size() - 1 - i]] = u;
    }
    return s;
}

Mat2 rx(double theta) {
    const double c = std::cos(theta / 2), s = std::sin(theta / 2);
    return {Complex{c, 0}, Complex{0, -s}, Complex{0, -s}, Complex{c, 0}};
}

Mat2 rz(double theta) {
    return {std::polar(1.0, -theta / 2), Complex{0, 0}, Complex{0, 0}, std::polar(1.0, theta / 2)};
}

VignetteAngles decompose_vignette(const Mat2 &u) {
    require(is_unitary(u, 1e-8), "decompose_vignette: matrix is not unitary");
    // Rx(-pi/2) Rz(a) Rx(pi/2) = Ry(a), so this is a ZYZ Euler decomposition
    // of the SU(2) representative.
    Complex det = u[0] * u[3] - u[1] * u[2];
    Complex root = std::sqrt(det);
    Mat2 v = {u[0] / root, u[1] / root, u[2] / root, u[3] / root};
    const double c = std::abs(v[0]), s = std::abs(v[2]);
    const double alpha = 2 * std::atan2(s, c);
    double sum = 0, diff = 0;  // gamma + beta, gamma - beta
    if (s < 1e-12) {
        sum = 2 * std::arg(v[3]);
    } else if (c < 1e-12) {
        diff = 2 * std::arg(v[2]);
    } else {
        sum = 2 * std::arg(v[3]);
        diff = 2 * std::arg(v[2]);
    }
    double gamma = (sum + diff) / 2;
    double beta = (sum - diff) / 2;
    if (s < 1e-12) {
        beta = sum;
        gamma = 0;
    } else if (c < 1e-12) {
        gamma = diff;
        beta = 0;
    }
    return {alpha, beta, gamma};
}

Mat2 recompose_vignette(const VignetteAngles &a) {
    return matmul(rz(a.residual_z),
                  matmul(rx(-M_PI / 2), matmul(rz(a.alpha), matmul(rx(M_PI / 2), rz(a.beta)))));
}

bool is_unitary(const Mat2 &u, double tol) { return max_abs_diff(matmul(adjoint(u), u), kIdentity2) <= tol; }

double distance_up_to_phase(const Mat2 &a, const Mat2 &b) {
    // Optimal phase aligns tr(b^dagger a).
    Complex overlap = trace_product(adjoint(b), a);
    Complex phase = std::abs(overlap) > 0 ? overlap / std::abs(overlap) : Complex{1, 0};
    Mat2 shifted = {b[0] * phase, b[1] * phase, b[2] * phase, b[3] * phase};
    return max_abs_diff(a, shifted);
}

}  // namespace rmkit
