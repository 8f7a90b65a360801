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

// Exact dense simulator. These routines are the ground truth that every
// estimator is checked against, so they favour exactness over speed.

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "rmkit/pauli.hpp"
#include "rmkit/types.hpp"

namespace rmkit {

inline constexpr unsigned kMaxPureQubits = 20;
inline constexpr unsigned kMaxDensityQubits = 12;
/// Dense diagonalization of a Hamiltonian.
inline constexpr unsigned kMaxEvolveQubits = 12;
inline constexpr unsigned kMaxHeisenbergQubits = 10;

using Qubits = std::vector<unsigned>;

class PureState {
  public:
    PureState() = default;
    /// Validates the norm (1 within 1e-10) and the size cap.
    PureState(unsigned n_qubits, DenseVector amplitudes);

    unsigned n_qubits() const { return n_; }
    std::size_t dim() const { return std::size_t{1} << n_; }
    const DenseVector &amplitudes() const { return amps_; }

  private:
    unsigned n_ = 0;
    DenseVector amps_;
};

class DensityState {
  public:
    DensityState() = default;
    /// Validates Hermiticity (1e-10), unit trace (1e-10) and, for up to 8
    /// qubits, eigenvalues >= -1e-8.
    DensityState(unsigned n_qubits, DenseMatrix matrix);

    unsigned n_qubits() const { return n_; }
    std::size_t dim() const { return std::size_t{1} << n_; }
    const DenseMatrix &matrix() const { return rho_; }

  private:
    unsigned n_ = 0;
    DenseMatrix rho_;
};

using State = std::variant<PureState, DensityState>;

unsigned n_qubits(const State &s);
DensityState to_density(const State &s);

struct HamiltonianTerm {
    double coeff;
    PauliString pauli;
};

class HamiltonianSpec {
  public:
    HamiltonianSpec() = default;
    HamiltonianSpec(unsigned n_qubits, std::vector<HamiltonianTerm> terms);

    unsigned n_qubits() const { return n_; }
    const std::vector<HamiltonianTerm> &terms() const { return terms_; }
    DenseMatrix to_matrix() const;
    /// Canonical text used as a cache key and for provenance.
    std::string fingerprint() const;

  private:
    unsigned n_ = 0;
    std::vector<HamiltonianTerm> terms_;
};

/// sum_{i<j} J/|i-j|^alpha (sigma_i^+ sigma_j^- + h.c.) = sum J_ij (X_i X_j + Y_i Y_j)/2.
HamiltonianSpec build_xy_hamiltonian(unsigned n, double J, double alpha);
/// Open transverse-field Ising chain: -sum J_i Z_i Z_{i+1} - sum h_i X_i.
HamiltonianSpec build_tfim(const std::vector<double> &zz, const std::vector<double> &x_field);
/// Open Ising chain with both fields: J sum Z_i Z_{i+1} + hx sum X_i + hz sum Z_i.
HamiltonianSpec build_mixed_field_ising(unsigned n, double J, double hx, double hz);

// ---- state preparation -----------------------------------------------------

struct StatePrepSpec {
    enum class Kind {
        kComputational,
        kNeel,
        kGhz,
        kProduct,
        kHaarPure,
        kRandomMixed,
        kMaximallyMixed,
        kGibbs,
        kWerner,
        kEigenstate,
        kDimer,
    };
    Kind kind = Kind::kComputational;
    unsigned n = 0;
    /// kComputational: "0101", qubit 0 first.
    std::string bits;
    /// kProduct: per-qubit Bloch angles (theta, phi).
    std::vector<std::array<double, 2>> bloch;
    std::uint64_t seed = 0;
    /// kRandomMixed: Ginibre rank (0 = full rank).
    unsigned rank = 0;
    /// kGibbs inverse temperature.
    double beta = 1.0;
    /// kWerner weight of the singlet-pair state.
    double p = 1.0;
    /// kEigenstate: index in ascending energy order (0 = ground state).
    unsigned eigen_index = 0;
    /// kDimer: 0 pairs (0,1),(2,3),...; 1 pairs (1,2),(3,4),... leaving the ends in |0>.
    unsigned offset = 0;
    std::optional<HamiltonianSpec> hamiltonian;
};

State prepare(const StatePrepSpec &spec);

PureState computational_state(unsigned n, std::uint64_t bits);
PureState neel_state(unsigned n);
PureState ghz_state(unsigned n);
PureState product_state(const std::vector<std::array<double, 2>> &bloch);
PureState haar_random_state(unsigned n, std::uint64_t seed);
/// Ginibre construction rho = G G^dagger / tr(G G^dagger) with G of size d x rank.
DensityState random_mixed_state(unsigned n, std::uint64_t seed, unsigned rank = 0);
DensityState maximally_mixed_state(unsigned n);
DensityState gibbs_state(const HamiltonianSpec &h, double beta);
/// p |Phi><Phi| + (1-p) I/d on 2*pairs qubits, |Phi> a product of singlets on (i, i+pairs).
DensityState werner_state(double p, unsigned pairs = 1);
PureState eigenstate(const HamiltonianSpec &h, unsigned index);
/// Product of singlets on neighbouring pairs; qubits left unpaired sit in |0>.
PureState dimer_state(unsigned n, unsigned offset);

// ---- dynamics ---------------------------------------------------------------

/// Dense diagonalization H = V diag(E) V^dagger, reused for every time t.
class Propagator {
  public:
    explicit Propagator(const HamiltonianSpec &h);

    unsigned n_qubits() const { return n_; }
    const Eigen::VectorXd &energies() const { return energies_; }
    const DenseMatrix &eigenvectors() const { return vectors_; }
    /// e^{-iHt}
    DenseMatrix unitary(double t) const;
    PureState evolve(const PureState &psi, double t) const;
    DensityState evolve(const DensityState &rho, double t) const;
    State evolve(const State &s, double t) const;
    /// W(t) = e^{-iHt} W e^{iHt}.
    DenseMatrix heisenberg(const PauliString &w, double t) const;

  private:
    unsigned n_;
    Eigen::VectorXd energies_;
    DenseMatrix vectors_;
};

/// Propagator for h, shared through a process-wide cache keyed by fingerprint.
std::shared_ptr<const Propagator> propagator_for(const HamiltonianSpec &h);

State evolve(const State &s, const HamiltonianSpec &h, double t);
DenseMatrix heisenberg(const PauliString &w, const HamiltonianSpec &h, double t);

/// U rho U^dagger (or U|psi>) with U the tensor product of per-qubit 2x2 unitaries.
State apply_local_unitaries(const State &s, std::span<const Mat2> unitaries);
PureState apply_local_unitaries(const PureState &s, std::span<const Mat2> unitaries);
DensityState apply_local_unitaries(const DensityState &s, std::span<const Mat2> unitaries);

/// Outcome distribution P(s) = <s| U rho U^dagger |s>.
std::vector<double> born_probabilities(const State &s, std::span<const Mat2> unitaries);

/// K i.i.d. bitstrings (bit q = qubit q) drawn from `probs`.
std::vector<std::uint64_t> sample_outcomes(std::span<const double> probs, std::size_t count, std::mt19937_64 &rng);

std::vector<std::uint64_t> born_sample(const State &s, std::span<const Mat2> unitaries, std::size_t count,
                                       std::mt19937_64 &rng);

// ---- noise ------------------------------------------------------------------

struct NoiseChannel {
    enum class Kind { kDepolarizing, kBitFlip, kGlobalDepolarizing };
    Kind kind = Kind::kDepolarizing;
    double p = 0.0;
};

/// Per-qubit depolarizing / bit-flip on every qubit, or the global channel
/// (1-p) rho + p I/d.
DensityState apply_noise(const State &s, const NoiseChannel &channel);

// ---- exact oracles ----------------------------------------------------------

double oracle_expectation(const State &s, const PauliString &p);
/// Reduced state on `qubits`; bit i of the result index is qubits[i].
DenseMatrix reduced_density_matrix(const State &s, const Qubits &qubits);
double oracle_purity(const State &s, const Qubits &subsystem);
double oracle_renyi2(const State &s, const Qubits &subsystem);
/// tr((rho_AB^{T_A})^n), n in {1, 2, 3, 4}.
double oracle_pt_moment(const State &s, const Qubits &a, const Qubits &b, unsigned n);
/// tr(R_I rho_I) with R_I reversing the order of the qubits listed in `window`.
double oracle_reflection(const State &s, const Qubits &window);
/// Normalized invariant Z_R / sqrt((P2(I1) + P2(I2)) / 2).
double oracle_reflection_normalized(const State &s, const Qubits &window);
/// tr(rho_inf W(t) V W(t) V) with rho_inf = I / 2^N.
double oracle_otoc(const HamiltonianSpec &h, const PauliString &w, const PauliString &v, double t);
/// tr(rho1 rho2) on a subsystem.
double oracle_overlap(const State &a, const State &b, const Qubits &subsystem);
/// S_A + S_B + S_C - S_AB - S_BC - S_AC + S_ABC from exact Renyi-2 entropies.
double oracle_topological_entropy(const State &s, const Qubits &a, const Qubits &b, const Qubits &c);

/// Partial transpose of an operator on |A| + |B| qubits (A occupying the low
/// bits) over the listed bit positions.
DenseMatrix partial_transpose(const DenseMatrix &m, std::uint64_t transposed_bits);

Qubits all_qubits(unsigned n);

}  // namespace rmkit
