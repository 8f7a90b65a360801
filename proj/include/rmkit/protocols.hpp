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

// Bitstring-level and two-dataset protocols: Hamming-distance purity,
// cross-platform overlap and F_max, direct fidelity estimation, and the
// twin-experiment OTOC.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rmkit/dataset.hpp"
#include "rmkit/estimate.hpp"
#include "rmkit/shadows.hpp"

namespace rmkit {

/// Largest subsystem accepted by the Hamming-distance estimators.
inline constexpr unsigned kMaxHammingSubsystem = 14;

// ---- purity and overlaps from bitstrings ----------------------------------

/// Per-setting values 2^|A| / (K (K - 1)) sum_{k != k'} (-2)^{-D[s_A, s'_A]}.
std::vector<double> purity_hamming_samples(const MeasurementDataset &ds, const Qubits &qubits);
JackknifeSample purity_hamming_jackknife(const MeasurementDataset &ds, const Qubits &qubits);
/// Reads only the outcome bits, never the unitaries. Needs K >= 2.
EstimateWithError purity_hamming(const MeasurementDataset &ds, const Qubits &qubits, const AggregateOptions &agg = {});

/// Throws kProtocol unless the two datasets share N, M, ensemble, seed and
/// every setting, and were sampled with different shot seeds.
void check_same_protocol(const MeasurementDataset &a, const MeasurementDataset &b);

/// 2^|A| / (M K1 K2) sum_m sum_{k, k'} (-2)^{-D[s1, s2]}: estimates tr(rho1_A rho2_A).
std::vector<double> cross_overlap_samples(const MeasurementDataset &a, const MeasurementDataset &b,
                                          const Qubits &qubits);
JackknifeSample cross_overlap_jackknife(const MeasurementDataset &a, const MeasurementDataset &b,
                                        const Qubits &qubits);
EstimateWithError cross_overlap(const MeasurementDataset &a, const MeasurementDataset &b, const Qubits &qubits);

/// tr(S1 S2) / (M1 M2) from the two shadows; the datasets need not share settings.
EstimateWithError cross_overlap_shadow(const MeasurementDataset &a, const MeasurementDataset &b,
                                       const Qubits &qubits);

struct FmaxResult {
    EstimateWithError fmax;
    EstimateWithError overlap;
    EstimateWithError purity_a;
    EstimateWithError purity_b;
};

/// tr(rho1 rho2) / max(tr rho1^2, tr rho2^2) with a joint jackknife over
/// settings. Flagged when the denominator is nonpositive or the value
/// leaves [-0.1, 1.1].
FmaxResult fmax(const MeasurementDataset &a, const MeasurementDataset &b, const Qubits &qubits);

// ---- direct fidelity estimation -------------------------------------------

/// psi = sum_j b_j W_j / 2^{N/2}; L indices drawn i.i.d. from b_j^2.
struct DfePlan {
    std::string target_label;
    unsigned n_qubits = 0;
    std::uint64_t seed = 0;
    std::size_t samples = 0;
    /// Distinct sampled Paulis (unsigned), their draw counts and b_j.
    std::vector<PauliString> paulis;
    std::vector<std::size_t> multiplicity;
    std::vector<double> b;

    nlohmann::json to_json() const;
    static DfePlan from_json(const nlohmann::json &j);
};

/// tr(W_j psi) for all 4^N Paulis; index x | (z << N). Needs N <= 8.
std::vector<double> pauli_decomposition(const PureState &target);

DfePlan dfe_plan(const PureState &target, std::size_t samples, std::uint64_t seed, const std::string &label = "");

struct DfeResult {
    EstimateWithError fidelity;
    /// Draws whose Pauli had no compatible setting; they are left out.
    std::size_t skipped = 0;
    std::size_t effective_samples = 0;
    std::vector<std::string> skipped_paulis;
};

/// F = mean over draws of tr(W_j rho)_est / tr(W_j psi). Error combines the
/// spread of the ratios over draws with a leave-one-setting-out jackknife of
/// the shared measurement noise.
DfeResult dfe_estimate(const DfePlan &plan, const MeasurementDataset &ds);

// ---- twin-experiment OTOC ---------------------------------------------------

enum class OtocEstimator {
    /// sum_{k,k'} (-2)^{-D[k,k']} <W>_1(k) <W>_2(k') over all initial
    /// bitstrings, normalized by the same statistic with V = I.
    kHammingWeighted,
    /// mean_U[<W>_1 <W>_2] / mean_U[<W>_1^2] at one fixed initial bitstring.
    kFixedState,
};

struct OtocOptions {
    /// 0: exact expectation values. Otherwise each <W> is the mean of this
    /// many +-1 readouts in the eigenbasis of W.
    std::size_t shots = 0;
    /// Initial bitstring for kFixedState.
    std::uint64_t initial_bits = 0;
};

/// Paired expectations for every setting m, time t and initial bitstring k:
/// w1 = <k|U^dagger e^{iHt} W e^{-iHt} U|k>, w2 the same with V applied after U.
/// `w1_repeat` is an independent second readout of w1 (finite-shot mode only).
struct OtocRun {
    HamiltonianSpec hamiltonian;
    PauliString w;
    PauliString v;
    std::vector<double> times;
    EnsembleKind ensemble = EnsembleKind::kHaar;
    std::size_t settings = 0;
    std::uint64_t seed = 0;
    OtocOptions options;
    /// [time][setting][initial bitstring]
    std::vector<std::vector<std::vector<double>>> w1, w2, w1_repeat;

    nlohmann::json to_json() const;
};

OtocRun otoc_run(const HamiltonianSpec &h, const PauliString &w, const PauliString &v,
                 const std::vector<double> &times, const EnsembleSpec &e, std::size_t M, std::uint64_t seed,
                 const OtocOptions &options = {});

/// One estimate per time. Flagged when the normalization vanishes.
std::vector<EstimateWithError> otoc_estimate(const OtocRun &run,
                                             OtocEstimator estimator = OtocEstimator::kHammingWeighted);

}  // namespace rmkit
