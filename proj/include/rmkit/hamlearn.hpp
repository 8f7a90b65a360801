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

// Hamiltonian recovery from a steady state: for [H, rho] = 0 and
// H = sum_m c_m W_m, every constraint operator A gives
// sum_m c_m i tr(rho [A, W_m]) = 0, so c spans the kernel of K.

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rmkit/dataset.hpp"
#include "rmkit/pauli.hpp"
#include "rmkit/state.hpp"

namespace rmkit {

/// Candidate terms W_m. Weights are <= locality, no duplicates, no identity.
struct AnsatzBasis {
    std::vector<PauliString> terms;
    unsigned locality = 0;
    /// Chain range r (0 when built from an explicit list).
    unsigned range = 0;
    std::string geometry;

    /// Every string of weight <= k whose support fits in a window of r + 1
    /// consecutive sites of an open chain, in a fixed order.
    static AnsatzBasis chain(unsigned n, unsigned k, unsigned r);
    /// Validates an explicit term list; signs are dropped.
    static AnsatzBasis from_terms(std::vector<PauliString> terms);

    std::size_t size() const { return terms.size(); }
    unsigned n_qubits() const { return terms.empty() ? 0 : terms.front().n_qubits(); }
    std::vector<std::string> labels() const;
};

struct PauliExpectation {
    double value = 0.0;
    double std_error = 0.0;
};

/// Real expectation of a Hermitian Pauli. Must be safe to call concurrently.
using ExpectationProvider = std::function<PauliExpectation(const PauliString &)>;

ExpectationProvider exact_provider(const State &state);
/// Classical-shadow Pauli prediction; throws NoDataError when no setting is
/// compatible. The dataset must outlive the provider.
ExpectationProvider shadow_provider(const MeasurementDataset &ds);

struct KMatrix {
    Eigen::MatrixXd k;
    /// Entry-wise standard errors (zero for exact providers).
    Eigen::MatrixXd std_error;
    /// Commutator Paulis the provider could not estimate (their entries are 0).
    std::vector<std::string> missing;
};

/// K_lm = i tr(rho [W_l, W_m]) on the ansatz itself: square and antisymmetric
/// with an exactly zero diagonal.
KMatrix build_K(const AnsatzBasis &basis, const ExpectationProvider &expect);

/// K_lm = i tr(rho [A_l, W_m]) for separate constraint operators A_l.
/// With constraints equal to the ansatz this is build_K.
KMatrix build_constraint_matrix(const std::vector<PauliString> &constraints, const AnsatzBasis &basis,
                                const ExpectationProvider &expect);

struct KernelResult {
    /// Unit-norm coupling estimate; the largest-magnitude entry is positive.
    Eigen::VectorXd c;
    /// sigma_{n-1} / sigma_n (second-smallest over smallest singular value), >= 1.
    double gap = 0.0;
    bool flagged = false;
    std::string flag_reason;
    /// Ascending.
    std::vector<double> singular_values;
    /// Frobenius norm of the entry-wise errors; bounds how far noise can move
    /// any singular value.
    double noise_floor = 0.0;
    std::vector<std::string> missing;
};

/// Right-singular vector of the smallest singular value. Flagged when the gap
/// is below the threshold, or when the second-smallest singular value does not
/// clear the noise floor (an odd antisymmetric matrix always has an exact null
/// vector, so pure noise can still show a large gap).
KernelResult recover(const Eigen::MatrixXd &k, double gap_threshold = 10.0, double noise_floor = 0.0);

/// Shadow-estimated K followed by recover. Without constraints the square K
/// on the ansatz is used.
KernelResult learn_from_dataset(const MeasurementDataset &ds, const AnsatzBasis &basis, double gap_threshold = 10.0,
                                const std::vector<PauliString> *constraints = nullptr);

/// |<a, b>| / (|a| |b|).
double cosine_similarity(const Eigen::VectorXd &a, const Eigen::VectorXd &b);

/// Coefficients of h on the ansatz terms (0 for absent terms); throws if h
/// has a term outside the ansatz.
Eigen::VectorXd couplings_on_basis(const HamiltonianSpec &h, const AnsatzBasis &basis);

}  // namespace rmkit
