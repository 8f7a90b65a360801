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

// Classical-shadow postprocessing. A snapshot of setting m is
//   rho_m = (1/K) sum_k (x)_q (3 U_q^dagger |s_q^(k)><s_q^(k)| U_q - I),
// kept in factorized form: per qubit the two possible factors (outcome 0 / 1)
// plus the K outcome words. Restricting to a subsystem drops factors, since
// every factor has unit trace.

#include <array>
#include <cstdint>
#include <vector>

#include "rmkit/dataset.hpp"
#include "rmkit/estimate.hpp"

namespace rmkit {

/// Largest subsystem for dense snapshot objects (2^8 x 2^8).
inline constexpr unsigned kMaxShadowSubsystem = 8;
/// Largest A u B for the multi-copy estimators, which keep one dense matrix per setting.
inline constexpr unsigned kMaxMulticopyQubits = 5;

/// 3 U^dagger |bit><bit| U - I.
Mat2 shadow_factor(const Mat2 &u, unsigned bit);

struct ShadowSnapshot {
    std::size_t m = 0;
    /// factors[q][b]: factor of qubit q for outcome bit b.
    std::vector<std::array<Mat2, 2>> factors;
    std::vector<std::uint64_t> shots;

    unsigned n_qubits() const { return static_cast<unsigned>(factors.size()); }
    /// (1/K) sum_k factor of qubit q; Hermitian with unit trace.
    Mat2 averaged_factor(unsigned q) const;
    /// Dense rho_m restricted to `qubits` (bit i of the index is qubits[i]).
    DenseMatrix dense(const Qubits &qubits) const;
};

ShadowSnapshot build_snapshot(const MeasurementRecord &r);

enum class PredictionPath { kAuto, kCompatibility, kSnapshot };

/// Number of settings whose basis is compatible with p (Clifford datasets).
std::size_t count_compatible(const MeasurementDataset &ds, const PauliString &p);

/// Per-setting values whose mean is the predict_pauli estimate.
std::vector<double> pauli_samples(const MeasurementDataset &ds, const PauliString &p,
                                  PredictionPath path = PredictionPath::kAuto);

/// Estimates tr(p rho). The compatibility path averages 3^w(p) * eigenvalue
/// over all (m, k), counting incompatible settings as zero; it needs a
/// Clifford dataset and throws NoDataError when no setting is compatible.
/// The snapshot path averages tr(p rho_m) and works for any ensemble.
/// kAuto picks the compatibility path for Clifford data.
EstimateWithError predict_pauli(const MeasurementDataset &ds, const PauliString &p,
                                PredictionPath path = PredictionPath::kAuto, const AggregateOptions &agg = {});

/// Estimates tr(O rho_A) for a dense Hermitian O on `qubits`.
EstimateWithError predict_observable(const MeasurementDataset &ds, const DenseMatrix &o, const Qubits &qubits,
                                     const AggregateOptions &agg = {});

/// Per-setting values tr(O rho_m) used by predict_observable.
std::vector<double> observable_samples(const MeasurementDataset &ds, const DenseMatrix &o, const Qubits &qubits);

/// Mean of restricted snapshots: Hermitian, unit trace, not necessarily positive.
DenseMatrix estimate_subsystem_state(const MeasurementDataset &ds, const Qubits &qubits);

/// U-statistic (tr(S^2) - sum_m tr(rho_m^2)) / (M (M - 1)), S = sum_m rho_m,
/// with leave-one-setting-out replicates.
JackknifeSample purity_shadow_jackknife(const MeasurementDataset &ds, const Qubits &qubits);
EstimateWithError purity_shadow(const MeasurementDataset &ds, const Qubits &qubits);

enum class PurityMethod { kHamming, kShadow };

/// S2 = -log2(P2). The error is propagated by the delta method. A
/// nonpositive purity estimate is flagged and its entropy left as NaN.
EstimateWithError renyi2_from_purity(const EstimateWithError &purity);
EstimateWithError renyi2(const MeasurementDataset &ds, const Qubits &qubits, PurityMethod method);

/// tr((P_sigma on `forward` (x) P_sigma^-1 on `inverse`) rho^{(x) n}) where
/// P_sigma permutes the n copies (copy i -> sigma[i]).
struct CopyPermutation {
    std::vector<unsigned> sigma;
    Qubits forward;
    Qubits inverse;
};

CopyPermutation cyclic_permutation(unsigned n, const Qubits &qubits);

/// Unbiased U-statistic over ordered n-tuples of distinct snapshots,
/// evaluated via set-partition (Moebius) inversion of unrestricted sums.
/// Errors come from a grouped jackknife over settings (up to 50 groups).
JackknifeSample multicopy_jackknife(const MeasurementDataset &ds, const CopyPermutation &op);
EstimateWithError multicopy_expect(const MeasurementDataset &ds, const CopyPermutation &op);

/// p_n = tr((rho_AB^{T_A})^n): cyclic on A, anticyclic on B.
EstimateWithError pt_moment(const MeasurementDataset &ds, const Qubits &a, const Qubits &b, unsigned n);

struct PptTestResult {
    bool entangled = false;
    EstimateWithError p2;
    EstimateWithError p3;
    /// p3 - p2^2 with its jointly resampled error.
    EstimateWithError difference;
    /// (p2^2 - p3) / (sigma_3 + sigma_p2^2): how many combined sigmas p3 sits below p2^2.
    double margin = 0.0;
    double z = 3.0;
};

/// Entangled iff p3 + z sigma_3 < p2^2 - z sigma', sigma' the error of p2^2.
/// PPT states satisfy p3 >= p2^2, so a violation certifies entanglement.
PptTestResult p3_ppt_test(const MeasurementDataset &ds, const Qubits &a, const Qubits &b, double z = 3.0);

struct ReflectionResult {
    EstimateWithError z_r;
    EstimateWithError z_normalized;
    EstimateWithError purity_left;
    EstimateWithError purity_right;
};

/// R_I swaps window[i] with window[L-1-i]. Z_R = tr(R_I rho_I) averages
/// prod_pairs tr(f_i f_i') over shots, or prod_pairs (3 delta(s_i, s_i') - 1)
/// when the dataset was acquired with mirrored unitaries on this window. The
/// normalization uses shadow purities of the two window halves. Errors by
/// joint leave-one-setting-out jackknife.
ReflectionResult reflection_invariant(const MeasurementDataset &ds, const Qubits &window);

/// Dense reflection operator on |window| qubits (bit i <-> bit L-1-i).
DenseMatrix reflection_operator(unsigned n_window);

/// S_A + S_B + S_C - S_AB - S_BC - S_AC + S_ABC from Renyi-2 estimates,
/// with a joint jackknife over settings.
EstimateWithError topological_entropy(const MeasurementDataset &ds, const Qubits &a, const Qubits &b,
                                      const Qubits &c, PurityMethod method = PurityMethod::kHamming);

}  // namespace rmkit
