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

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "rmkit/pauli.hpp"
#include "rmkit/state.hpp"
#include "rmkit/types.hpp"

namespace rmkit {

enum class EnsembleKind { kHaar, kClifford };

std::string_view ensemble_name(EnsembleKind kind);
/// Accepts "haar"/"single_qubit_haar" and "clifford"/"single_qubit_clifford".
EnsembleKind parse_ensemble(std::string_view name);

struct EnsembleSpec {
    EnsembleKind kind = EnsembleKind::kClifford;
    unsigned n_qubits = 0;
};

/// One single-qubit Clifford: its matrix (global phase fixed so the first
/// nonzero entry is real positive) and the signed Pauli U^dagger Z U that a
/// computational-basis readout after U measures.
struct CliffordElement {
    Mat2 matrix;
    PauliLetter measured;
    bool negative;
};

/// The 24 single-qubit Cliffords in a fixed canonical order.
const std::array<CliffordElement, 24> &clifford_table();

/// Setting m: one 2x2 unitary per qubit applied before readout.
struct LocalUnitarySetting {
    std::size_t index = 0;
    EnsembleKind kind = EnsembleKind::kClifford;
    std::uint64_t seed = 0;
    std::vector<Mat2> unitaries;
    /// Clifford kind only: table index per qubit.
    std::vector<std::uint8_t> clifford_ids;
    /// Clifford kind only: signed measured basis per qubit.
    std::optional<BasisString> basis;

    unsigned n_qubits() const { return static_cast<unsigned>(unitaries.size()); }
    /// Keeps the listed qubits, in order.
    LocalUnitarySetting restricted(const Qubits &qubits) const;

    bool operator==(const LocalUnitarySetting &) const = default;
};

/// Builds the Clifford setting for the given table indices.
LocalUnitarySetting clifford_setting(std::size_t index, std::uint64_t seed, const std::vector<std::uint8_t> &ids);

/// Draws a Haar (CUE) 2x2 unitary: complex Gaussian matrix, Gram-Schmidt, phase fix.
Mat2 sample_haar_unitary(std::mt19937_64 &rng);

/// Deterministic function of (ensemble, master_seed, m).
LocalUnitarySetting sample_setting(const EnsembleSpec &e, std::uint64_t master_seed, std::size_t m);

/// Unitaries on `window` are drawn once per mirrored pair (window[i], window[L-1-i])
/// and shared by both members; qubits outside the window get the identity.
LocalUnitarySetting symmetric_setting(const EnsembleSpec &e, const Qubits &window, std::uint64_t master_seed,
                                      std::size_t m);

/// u ~ Rz(residual) Rx(-pi/2) Rz(alpha) Rx(pi/2) Rz(beta) up to a global phase.
/// The residual Z rotation acts after the unitary, where it commutes with the
/// computational-basis readout, so (alpha, beta) fix all measured statistics.
struct VignetteAngles {
    double alpha;
    double beta;
    double residual_z;
};

VignetteAngles decompose_vignette(const Mat2 &u);
Mat2 recompose_vignette(const VignetteAngles &angles);

Mat2 rx(double theta);
Mat2 rz(double theta);

bool is_unitary(const Mat2 &u, double tol = 1e-10);
/// max |a - e^{i phi} b| minimized over phi.
double distance_up_to_phase(const Mat2 &a, const Mat2 &b);

}  // namespace rmkit
