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

#include "rmkit/hamlearn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <set>

#include "rmkit/error.hpp"
#include "rmkit/parallel.hpp"
#include "rmkit/shadows.hpp"

namespace rmkit {

AnsatzBasis AnsatzBasis::chain(unsigned n, unsigned k, unsigned r) {
    if (n == 0 || k == 0) fail(ErrorKind::kConfig, "ansatz: need n >= 1 and k >= 1");
    if (n > 64) fail(ErrorKind::kSizeCap, "ansatz: more than 64 qubits");
    AnsatzBasis b;
    b.locality = k;
    b.range = r;
    b.geometry = "chain(r=" + std::to_string(r) + ")";
    const unsigned window = std::min(n, r + 1);
    // Anchor each support at its leftmost site so every string appears once.
    for (unsigned start = 0; start < n; ++start) {
        const unsigned span = std::min(window, n - start);
        for (std::uint64_t rest = 0; rest < (std::uint64_t{1} << (span - 1)); ++rest) {
            const std::uint64_t support = (std::uint64_t{1} << start) | (rest << (start + 1));
            const unsigned w = static_cast<unsigned>(std::popcount(support));
            if (w > k) continue;
            std::vector<unsigned> sites;
            for (unsigned q = 0; q < n; ++q)
                if ((support >> q) & 1u) sites.push_back(q);
            std::uint64_t total = 1;
            for (unsigned i = 0; i < w; ++i) total *= 3;
            for (std::uint64_t code = 0; code < total; ++code) {
                std::uint64_t x = 0, z = 0, c = code;
                for (unsigned q : sites) {
                    const unsigned letter = static_cast<unsigned>(c % 3);  // X, Y, Z
                    c /= 3;
                    if (letter != 2) x |= std::uint64_t{1} << q;
                    if (letter != 0) z |= std::uint64_t{1} << q;
                }
                b.terms.emplace_back(n, x, z, 0);
            }
        }
    }
    return b;
}

AnsatzBasis AnsatzBasis::from_terms(std::vector<PauliString> terms) {
    if (terms.empty()) fail(ErrorKind::kConfig, "ansatz: empty term list");
    AnsatzBasis b;
    b.geometry = "explicit";
    std::set<std::pair<std::uint64_t, std::uint64_t>> seen;
    const unsigned n = terms.front().n_qubits();
    for (auto &t : terms) {
        if (t.n_qubits() != n) fail(ErrorKind::kConfig, "ansatz: terms have different widths");
        if (t.is_identity()) fail(ErrorKind::kConfig, "ansatz: the identity carries no information");
        if (!seen.insert({t.x_mask(), t.z_mask()}).second) fail(ErrorKind::kConfig, "ansatz: duplicate term " + t.letters());
        t = t.unsigned_part();
        b.locality = std::max(b.locality, t.weight());
    }
    b.terms = std::move(terms);
    return b;
}

std::vector<std::string> AnsatzBasis::labels() const {
    std::vector<std::string> out;
    for (const auto &t : terms) out.push_back(t.letters());
    return out;
}

ExpectationProvider exact_provider(const State &state) {
    return [state](const PauliString &p) { return PauliExpectation{oracle_expectation(state, p), 0.0}; };
}

ExpectationProvider shadow_provider(const MeasurementDataset &ds) {
    return [&ds](const PauliString &p) {
        auto e = predict_pauli(ds, p);
        return PauliExpectation{e.value, e.std_error};
    };
}

KMatrix build_constraint_matrix(const std::vector<PauliString> &constraints, const AnsatzBasis &basis,
                                const ExpectationProvider &expect) {
    const std::size_t rows = constraints.size(), cols = basis.size();
    if (rows == 0 || cols == 0) fail(ErrorKind::kConfig, "K matrix: no constraints or no ansatz terms");
    for (const auto &a : constraints) {
        if (a.n_qubits() != basis.n_qubits()) fail(ErrorKind::kConfig, "K matrix: constraint width differs from the ansatz");
    }
    KMatrix out;
    out.k = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    out.std_error = out.k;
    std::set<std::string> missing;
    std::mutex lock;
    parallel_for(rows, [&](std::size_t l) {
        for (std::size_t m = 0; m < cols; ++m) {
            // i[A, W] = 2 * commutator(A, W) when they anticommute, 0 otherwise.
            auto c = commutator(constraints[l].unsigned_part(), basis.terms[m]);
            if (!c) continue;
            try {
                const auto e = expect(*c);
                out.k(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(m)) = 2.0 * e.value;
                out.std_error(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(m)) = 2.0 * e.std_error;
            } catch (const NoDataError &) {
                std::lock_guard<std::mutex> g(lock);
                missing.insert(c->unsigned_part().letters());
            }
        }
    });
    out.missing.assign(missing.begin(), missing.end());
    return out;
}

KMatrix build_K(const AnsatzBasis &basis, const ExpectationProvider &expect) {
    const std::size_t n = basis.size();
    if (n == 0) fail(ErrorKind::kConfig, "K matrix: empty ansatz");
    KMatrix out;
    out.k = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    out.std_error = out.k;
    std::set<std::string> missing;
    std::mutex lock;
    // Upper triangle only, mirrored with a sign, so antisymmetry holds exactly.
    parallel_for(n, [&](std::size_t l) {
        for (std::size_t m = l + 1; m < n; ++m) {
            auto c = commutator(basis.terms[l], basis.terms[m]);
            if (!c) continue;
            PauliExpectation e;
            try {
                e = expect(*c);
            } catch (const NoDataError &) {
                std::lock_guard<std::mutex> g(lock);
                missing.insert(c->unsigned_part().letters());
            }
            const auto i = static_cast<Eigen::Index>(l), j = static_cast<Eigen::Index>(m);
            out.k(i, j) = 2.0 * e.value;
            out.k(j, i) = -2.0 * e.value;
            out.std_error(i, j) = out.std_error(j, i) = 2.0 * e.std_error;
        }
    });
    out.missing.assign(missing.begin(), missing.end());
    return out;
}

KernelResult recover(const Eigen::MatrixXd &k, double gap_threshold, double noise_floor) {
    const Eigen::Index n = k.cols();
    if (n == 0) fail(ErrorKind::kConfig, "recover: empty matrix");
    KernelResult r;
    // Pad short matrices with zero rows so the full right-singular basis exists.
    Eigen::MatrixXd a = k;
    if (a.rows() < n) {
        a.conservativeResize(n, n);
        a.bottomRows(n - k.rows()).setZero();
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
    const auto &s = svd.singularValues();  // descending
    for (Eigen::Index i = s.size() - 1; i >= 0; --i) r.singular_values.push_back(s(i));
    r.c = svd.matrixV().col(n - 1);
    Eigen::Index arg = 0;
    r.c.cwiseAbs().maxCoeff(&arg);
    if (r.c(arg) < 0) r.c = -r.c;
    if (n == 1) {
        r.gap = std::numeric_limits<double>::infinity();
    } else {
        const double smallest = s(n - 1), second = s(n - 2);
        r.gap = smallest > 0 ? second / smallest : (second > 0 ? std::numeric_limits<double>::infinity() : 1.0);
    }
    r.noise_floor = noise_floor;
    if (!(r.gap >= gap_threshold)) {
        r.flagged = true;
        r.flag_reason = "kernel not unique: singular-value gap below " + std::to_string(gap_threshold);
    } else if (n > 1 && noise_floor > 0 && s(n - 2) <= noise_floor) {
        r.flagged = true;
        r.flag_reason = "kernel not resolved: second-smallest singular value is within the noise floor";
    }
    return r;
}

KernelResult learn_from_dataset(const MeasurementDataset &ds, const AnsatzBasis &basis, double gap_threshold,
                                const std::vector<PauliString> *constraints) {
    if (basis.n_qubits() != ds.n_qubits()) fail(ErrorKind::kConfig, "hamlearn: ansatz width differs from the dataset");
    const auto provider = shadow_provider(ds);
    KMatrix k = constraints ? build_constraint_matrix(*constraints, basis, provider) : build_K(basis, provider);
    auto r = recover(k.k, gap_threshold, k.std_error.norm());
    r.missing = std::move(k.missing);
    if (!r.missing.empty()) {
        r.flagged = true;
        r.flag_reason = std::to_string(r.missing.size()) + " commutator Paulis had no compatible setting" +
                        (r.flag_reason.empty() ? "" : "; " + r.flag_reason);
    }
    return r;
}

double cosine_similarity(const Eigen::VectorXd &a, const Eigen::VectorXd &b) {
    require(a.size() == b.size(), "cosine_similarity: size mismatch");
    const double na = a.norm(), nb = b.norm();
    if (na == 0 || nb == 0) return 0.0;
    return std::abs(a.dot(b)) / (na * nb);
}

Eigen::VectorXd couplings_on_basis(const HamiltonianSpec &h, const AnsatzBasis &basis) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.size()));
    for (const auto &term : h.terms()) {
        bool found = false;
        for (std::size_t m = 0; m < basis.size(); ++m) {
            if (basis.terms[m].x_mask() == term.pauli.x_mask() && basis.terms[m].z_mask() == term.pauli.z_mask()) {
                c(static_cast<Eigen::Index>(m)) += term.coeff * term.pauli.real_sign();
                found = true;
            }
        }
        if (!found) fail(ErrorKind::kConfig, "couplings_on_basis: term " + term.pauli.str() + " is outside the ansatz");
    }
    return c;
}

}  // namespace rmkit
