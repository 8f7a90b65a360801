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

#include "rmkit/state.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>

#include "rmkit/error.hpp"
#include "rmkit/kernels.hpp"

namespace rmkit {

namespace {

void check_pure_cap(unsigned n) {
    if (n > kMaxPureQubits) fail(ErrorKind::kSizeCap, "pure states are limited to 20 qubits");
}

void check_density_cap(unsigned n) {
    if (n > kMaxDensityQubits) fail(ErrorKind::kSizeCap, "density matrices are limited to 12 qubits");
}

/// Scatter tables: full index of (local bits of `qubits`) is the OR of table entries.
std::vector<std::size_t> scatter_table(const Qubits &qubits) {
    std::vector<std::size_t> table(std::size_t{1} << qubits.size(), 0);
    for (std::size_t local = 0; local < table.size(); ++local) {
        std::size_t full = 0;
        for (std::size_t i = 0; i < qubits.size(); ++i) {
            if ((local >> i) & 1u) full |= std::size_t{1} << qubits[i];
        }
        table[local] = full;
    }
    return table;
}

Qubits complement(const Qubits &qubits, unsigned n) {
    std::vector<bool> in(n, false);
    for (unsigned q : qubits) {
        require(q < n, "subsystem qubit out of range");
        require(!in[q], "subsystem lists a qubit twice");
        in[q] = true;
    }
    Qubits rest;
    for (unsigned q = 0; q < n; ++q) {
        if (!in[q]) rest.push_back(q);
    }
    return rest;
}

const Mat2 kPauliX = {Complex{0, 0}, Complex{1, 0}, Complex{1, 0}, Complex{0, 0}};
const Mat2 kPauliY = {Complex{0, 0}, Complex{0, -1}, Complex{0, 1}, Complex{0, 0}};
const Mat2 kPauliZ = {Complex{1, 0}, Complex{0, 0}, Complex{0, 0}, Complex{-1, 0}};

/// rho <- (u_q) rho (u_q)^dagger on a column-major flattened matrix.
void conjugate_qubit(DenseMatrix &rho, unsigned n, unsigned q, const Mat2 &u) {
    std::span<Complex> flat(rho.data(), static_cast<std::size_t>(rho.size()));
    kernels::apply_1q(flat, q, u);
    kernels::apply_1q(flat, q + n, conj(u));
}

double trace_power(const DenseMatrix &x, unsigned n) {
    switch (n) {
        case 1:
            return x.trace().real();
        case 2:
            return (x * x).trace().real();
        case 3:
            return (x * x * x).trace().real();
        case 4: {
            DenseMatrix x2 = x * x;
            return (x2 * x2).trace().real();
        }
        default:
            throw Error(ErrorKind::kInvalidArgument, "moment order must be in {1,2,3,4}");
    }
}

}  // namespace

Qubits all_qubits(unsigned n) {
    Qubits q(n);
    for (unsigned i = 0; i < n; ++i) q[i] = i;
    return q;
}

// ---- types ------------------------------------------------------------------

PureState::PureState(unsigned n_qubits, DenseVector amplitudes) : n_(n_qubits), amps_(std::move(amplitudes)) {
    check_pure_cap(n_qubits);
    require(static_cast<std::size_t>(amps_.size()) == dim(), "PureState: amplitude count must be 2^n");
    require(std::abs(amps_.norm() - 1.0) <= 1e-10, "PureState: state is not normalized");
}

DensityState::DensityState(unsigned n_qubits, DenseMatrix matrix) : n_(n_qubits), rho_(std::move(matrix)) {
    check_density_cap(n_qubits);
    require(static_cast<std::size_t>(rho_.rows()) == dim() && rho_.rows() == rho_.cols(),
            "DensityState: matrix must be 2^n x 2^n");
    require((rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() < 1e-10, "DensityState: matrix is not Hermitian");
    require(std::abs(rho_.trace() - Complex(1.0, 0.0)) <= 1e-10, "DensityState: trace differs from 1");
    if (n_qubits <= 8) {
        Eigen::SelfAdjointEigenSolver<DenseMatrix> es(rho_, Eigen::EigenvaluesOnly);
        require(es.eigenvalues().minCoeff() >= -1e-8, "DensityState: matrix has a negative eigenvalue");
    }
}

unsigned n_qubits(const State &s) {
    return std::visit([](const auto &x) { return x.n_qubits(); }, s);
}

DensityState to_density(const State &s) {
    if (const auto *rho = std::get_if<DensityState>(&s)) return *rho;
    const auto &psi = std::get<PureState>(s);
    check_density_cap(psi.n_qubits());
    DenseMatrix m = psi.amplitudes() * psi.amplitudes().adjoint();
    // Remove rounding asymmetry so the Hermiticity check is exact.
    m = (m + m.adjoint()) * 0.5;
    return DensityState(psi.n_qubits(), std::move(m));
}

// ---- Hamiltonians -----------------------------------------------------------

HamiltonianSpec::HamiltonianSpec(unsigned n_qubits, std::vector<HamiltonianTerm> terms)
    : n_(n_qubits), terms_(std::move(terms)) {
    for (const auto &t : terms_) {
        require(t.pauli.n_qubits() == n_, "HamiltonianSpec: term qubit count mismatch");
        require(std::isfinite(t.coeff), "HamiltonianSpec: non-finite coefficient");
        require(t.pauli.is_hermitian(), "HamiltonianSpec: term must be Hermitian");
    }
}

DenseMatrix HamiltonianSpec::to_matrix() const {
    if (n_ > kMaxEvolveQubits) fail(ErrorKind::kSizeCap, "Hamiltonian materialization limited to 12 qubits");
    const std::size_t dim = std::size_t{1} << n_;
    DenseMatrix h = DenseMatrix::Zero(dim, dim);
    static const Complex kPhase[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    for (const auto &t : terms_) {
        const auto &p = t.pauli;
        const unsigned base = p.phase() + static_cast<unsigned>(std::popcount(p.x_mask() & p.z_mask()));
        for (std::size_t c = 0; c < dim; ++c) {
            unsigned ph = base + ((std::popcount(p.z_mask() & c) & 1) ? 2u : 0u);
            h(c ^ p.x_mask(), c) += t.coeff * kPhase[ph & 3u];
        }
    }
    return h;
}

std::string HamiltonianSpec::fingerprint() const {
    std::string out = "n=" + std::to_string(n_);
    char buf[64];
    for (const auto &t : terms_) {
        std::snprintf(buf, sizeof buf, ";%.17g*", t.coeff);
        out += buf;
        out += t.pauli.str();
    }
    return out;
}

HamiltonianSpec build_xy_hamiltonian(unsigned n, double J, double alpha) {
    require(n >= 2, "build_xy_hamiltonian: need at least two qubits");
    require(alpha > 0, "build_xy_hamiltonian: alpha must be positive");
    std::vector<HamiltonianTerm> terms;
    for (unsigned i = 0; i < n; ++i) {
        for (unsigned j = i + 1; j < n; ++j) {
            double jij = J / std::pow(static_cast<double>(j - i), alpha);
            std::uint64_t mask = (std::uint64_t{1} << i) | (std::uint64_t{1} << j);
            terms.push_back({jij / 2, PauliString(n, mask, 0)});
            terms.push_back({jij / 2, PauliString(n, mask, mask)});
        }
    }
    return {n, std::move(terms)};
}

HamiltonianSpec build_tfim(const std::vector<double> &zz, const std::vector<double> &x_field) {
    const auto n = static_cast<unsigned>(x_field.size());
    require(n >= 2 && zz.size() == n - 1, "build_tfim: need n fields and n-1 couplings");
    std::vector<HamiltonianTerm> terms;
    for (unsigned i = 0; i + 1 < n; ++i) {
        std::uint64_t mask = (std::uint64_t{1} << i) | (std::uint64_t{1} << (i + 1));
        terms.push_back({-zz[i], PauliString(n, 0, mask)});
    }
    for (unsigned i = 0; i < n; ++i) terms.push_back({-x_field[i], PauliString::single(n, i, PauliLetter::X)});
    return {n, std::move(terms)};
}

HamiltonianSpec build_mixed_field_ising(unsigned n, double J, double hx, double hz) {
    require(n >= 2, "build_mixed_field_ising: need at least two qubits");
    std::vector<HamiltonianTerm> terms;
    for (unsigned i = 0; i + 1 < n; ++i) {
        std::uint64_t mask = (std::uint64_t{1} << i) | (std::uint64_t{1} << (i + 1));
        terms.push_back({J, PauliString(n, 0, mask)});
    }
    for (unsigned i = 0; i < n; ++i) {
        terms.push_back({hx, PauliString::single(n, i, PauliLetter::X)});
        terms.push_back({hz, PauliString::single(n, i, PauliLetter::Z)});
    }
    return {n, std::move(terms)};
}

// ---- preparation ------------------------------------------------------------

PureState computational_state(unsigned n, std::uint64_t bits) {
    check_pure_cap(n);
    require((bits & ~low_mask(n)) == 0, "computational_state: bits beyond n");
    DenseVector v = DenseVector::Zero(std::size_t{1} << n);
    v(static_cast<Eigen::Index>(bits)) = 1.0;
    return {n, std::move(v)};
}

PureState neel_state(unsigned n) {
    std::uint64_t bits = 0;
    for (unsigned q = 1; q < n; q += 2) bits |= std::uint64_t{1} << q;
    return computational_state(n, bits);
}

PureState ghz_state(unsigned n) {
    check_pure_cap(n);
    require(n >= 1, "ghz_state: need at least one qubit");
    DenseVector v = DenseVector::Zero(std::size_t{1} << n);
    v(0) = M_SQRT1_2;
    v(static_cast<Eigen::Index>(low_mask(n))) = M_SQRT1_2;
    return {n, std::move(v)};
}

PureState product_state(const std::vector<std::array<double, 2>> &bloch) {
    const auto n = static_cast<unsigned>(bloch.size());
    check_pure_cap(n);
    DenseVector v = DenseVector::Ones(std::size_t{1} << n);
    for (unsigned q = 0; q < n; ++q) {
        Complex a0 = std::cos(bloch[q][0] / 2);
        Complex a1 = std::polar(std::sin(bloch[q][0] / 2), bloch[q][1]);
        for (Eigen::Index i = 0; i < v.size(); ++i) v(i) *= ((i >> q) & 1) ? a1 : a0;
    }
    v.normalize();
    return {n, std::move(v)};
}

PureState haar_random_state(unsigned n, std::uint64_t seed) {
    check_pure_cap(n);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    DenseVector v(std::size_t{1} << n);
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        double re = gauss(rng);
        double im = gauss(rng);
        v(i) = Complex(re, im);
    }
    v.normalize();
    return {n, std::move(v)};
}

DensityState random_mixed_state(unsigned n, std::uint64_t seed, unsigned rank) {
    check_density_cap(n);
    const std::size_t dim = std::size_t{1} << n;
    const std::size_t r = rank == 0 ? dim : rank;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    DenseMatrix g(dim, r);
    for (Eigen::Index c = 0; c < g.cols(); ++c) {
        for (Eigen::Index i = 0; i < g.rows(); ++i) {
            double re = gauss(rng);
            double im = gauss(rng);
            g(i, c) = Complex(re, im);
        }
    }
    DenseMatrix rho = g * g.adjoint();
    rho /= rho.trace();
    rho = (rho + rho.adjoint()) * 0.5;
    return {n, std::move(rho)};
}

DensityState maximally_mixed_state(unsigned n) {
    check_density_cap(n);
    const std::size_t dim = std::size_t{1} << n;
    DenseMatrix rho = DenseMatrix::Identity(dim, dim) / static_cast<double>(dim);
    return {n, std::move(rho)};
}

DensityState gibbs_state(const HamiltonianSpec &h, double beta) {
    check_density_cap(h.n_qubits());
    auto prop = propagator_for(h);
    const auto &e = prop->energies();
    Eigen::VectorXd w = (-beta * (e.array() - e.minCoeff())).exp();
    w /= w.sum();
    const auto &v = prop->eigenvectors();
    DenseMatrix rho = v * w.cast<Complex>().asDiagonal() * v.adjoint();
    rho = (rho + rho.adjoint()) * 0.5;
    return {h.n_qubits(), std::move(rho)};
}

DensityState werner_state(double p, unsigned pairs) {
    require(p >= 0 && p <= 1, "werner_state: weight must lie in [0, 1]");
    require(pairs >= 1, "werner_state: need at least one pair");
    const unsigned n = 2 * pairs;
    check_density_cap(n);
    const std::size_t dim = std::size_t{1} << n;
    DenseVector phi = DenseVector::Zero(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        double amp = 1.0;
        for (unsigned k = 0; k < pairs && amp != 0.0; ++k) {
            unsigned a = (i >> k) & 1u, b = (i >> (k + pairs)) & 1u;
            amp *= a == b ? 0.0 : (a == 0 ? M_SQRT1_2 : -M_SQRT1_2);
        }
        phi(static_cast<Eigen::Index>(i)) = amp;
    }
    DenseMatrix rho = p * (phi * phi.adjoint()) + (1 - p) * DenseMatrix::Identity(dim, dim) / static_cast<double>(dim);
    rho = (rho + rho.adjoint()) * 0.5;
    return {n, std::move(rho)};
}

PureState eigenstate(const HamiltonianSpec &h, unsigned index) {
    auto prop = propagator_for(h);
    require(index < prop->eigenvectors().cols(), "eigenstate: index out of range");
    DenseVector v = prop->eigenvectors().col(index);
    v.normalize();
    return {h.n_qubits(), std::move(v)};
}

PureState dimer_state(unsigned n, unsigned offset) {
    check_pure_cap(n);
    require(offset <= 1, "dimer_state: offset must be 0 or 1");
    const std::size_t dim = std::size_t{1} << n;
    DenseVector v = DenseVector::Zero(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        double amp = 1.0;
        unsigned q = 0;
        while (q < n && amp != 0.0) {
            if (q >= offset && q + 1 < n && (q - offset) % 2 == 0) {
                unsigned a = (i >> q) & 1u, b = (i >> (q + 1)) & 1u;
                amp *= a == b ? 0.0 : (a == 0 ? M_SQRT1_2 : -M_SQRT1_2);
                q += 2;
            } else {
                if ((i >> q) & 1u) amp = 0.0;
                q += 1;
            }
        }
        v(static_cast<Eigen::Index>(i)) = amp;
    }
    return {n, std::move(v)};
}

State prepare(const StatePrepSpec &spec) {
    using K = StatePrepSpec::Kind;
    switch (spec.kind) {
        case K::kComputational: {
            unsigned n = spec.bits.empty() ? spec.n : static_cast<unsigned>(spec.bits.size());
            std::uint64_t bits = 0;
            for (std::size_t q = 0; q < spec.bits.size(); ++q) {
                require(spec.bits[q] == '0' || spec.bits[q] == '1', "computational state: bits must be 0/1");
                if (spec.bits[q] == '1') bits |= std::uint64_t{1} << q;
            }
            return computational_state(n, bits);
        }
        case K::kNeel:
            return neel_state(spec.n);
        case K::kGhz:
            return ghz_state(spec.n);
        case K::kProduct:
            return product_state(spec.bloch);
        case K::kHaarPure:
            return haar_random_state(spec.n, spec.seed);
        case K::kRandomMixed:
            return random_mixed_state(spec.n, spec.seed, spec.rank);
        case K::kMaximallyMixed:
            return maximally_mixed_state(spec.n);
        case K::kGibbs:
            require(spec.hamiltonian.has_value(), "gibbs state needs a Hamiltonian");
            return gibbs_state(*spec.hamiltonian, spec.beta);
        case K::kWerner:
            return werner_state(spec.p, spec.n == 0 ? 1 : spec.n / 2);
        case K::kEigenstate:
            require(spec.hamiltonian.has_value(), "eigenstate needs a Hamiltonian");
            return eigenstate(*spec.hamiltonian, spec.eigen_index);
        case K::kDimer:
            return dimer_state(spec.n, spec.offset);
    }
    throw Error(ErrorKind::kInvalidArgument, "unknown state kind");
}

// ---- dynamics ---------------------------------------------------------------

Propagator::Propagator(const HamiltonianSpec &h) : n_(h.n_qubits()) {
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(h.to_matrix());
    energies_ = es.eigenvalues();
    vectors_ = es.eigenvectors();
}

DenseMatrix Propagator::unitary(double t) const {
    DenseVector phases = (energies_.cast<Complex>() * Complex(0, -t)).array().exp();
    return vectors_ * phases.asDiagonal() * vectors_.adjoint();
}

PureState Propagator::evolve(const PureState &psi, double t) const {
    require(psi.n_qubits() == n_, "evolve: qubit count mismatch");
    if (t == 0.0) return psi;
    DenseVector phases = (energies_.cast<Complex>() * Complex(0, -t)).array().exp();
    DenseVector coeffs = vectors_.adjoint() * psi.amplitudes();
    DenseVector out = vectors_ * phases.cwiseProduct(coeffs);
    out.normalize();
    return {n_, std::move(out)};
}

DensityState Propagator::evolve(const DensityState &rho, double t) const {
    require(rho.n_qubits() == n_, "evolve: qubit count mismatch");
    if (t == 0.0) return rho;
    DenseMatrix u = unitary(t);
    DenseMatrix out = u * rho.matrix() * u.adjoint();
    out = (out + out.adjoint()) * 0.5;
    out /= out.trace().real();
    return {n_, std::move(out)};
}

State Propagator::evolve(const State &s, double t) const {
    return std::visit([&](const auto &x) -> State { return evolve(x, t); }, s);
}

DenseMatrix Propagator::heisenberg(const PauliString &w, double t) const {
    if (n_ > kMaxHeisenbergQubits) fail(ErrorKind::kSizeCap, "Heisenberg evolution limited to 10 qubits");
    require(w.n_qubits() == n_, "heisenberg: qubit count mismatch");
    DenseMatrix wm = to_matrix(w);
    if (t == 0.0) return wm;
    DenseMatrix u = unitary(t);
    return u * wm * u.adjoint();
}

std::shared_ptr<const Propagator> propagator_for(const HamiltonianSpec &h) {
    if (h.n_qubits() > kMaxEvolveQubits) fail(ErrorKind::kSizeCap, "dense diagonalization limited to 12 qubits");
    static std::mutex mutex;
    static std::map<std::string, std::shared_ptr<const Propagator>> cache;
    const std::string key = h.fingerprint();
    {
        std::lock_guard<std::mutex> lock(mutex);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    auto prop = std::make_shared<const Propagator>(h);
    std::lock_guard<std::mutex> lock(mutex);
    if (cache.size() >= 32) cache.clear();
    return cache.emplace(key, prop).first->second;
}

State evolve(const State &s, const HamiltonianSpec &h, double t) {
    require(n_qubits(s) == h.n_qubits(), "evolve: qubit count mismatch");
    return propagator_for(h)->evolve(s, t);
}

DenseMatrix heisenberg(const PauliString &w, const HamiltonianSpec &h, double t) {
    if (h.n_qubits() > kMaxHeisenbergQubits) fail(ErrorKind::kSizeCap, "Heisenberg evolution limited to 10 qubits");
    return propagator_for(h)->heisenberg(w, t);
}

PureState apply_local_unitaries(const PureState &s, std::span<const Mat2> unitaries) {
    require(unitaries.size() == s.n_qubits(), "apply_local_unitaries: one unitary per qubit required");
    DenseVector v = s.amplitudes();
    std::span<Complex> flat(v.data(), static_cast<std::size_t>(v.size()));
    for (unsigned q = 0; q < s.n_qubits(); ++q) kernels::apply_1q(flat, q, unitaries[q]);
    // Renormalize away rounding so the result passes the 1e-10 norm check at any size.
    v.normalize();
    return {s.n_qubits(), std::move(v)};
}

DensityState apply_local_unitaries(const DensityState &s, std::span<const Mat2> unitaries) {
    require(unitaries.size() == s.n_qubits(), "apply_local_unitaries: one unitary per qubit required");
    DenseMatrix rho = s.matrix();
    for (unsigned q = 0; q < s.n_qubits(); ++q) conjugate_qubit(rho, s.n_qubits(), q, unitaries[q]);
    rho = (rho + rho.adjoint()) * 0.5;
    rho /= rho.trace().real();
    return {s.n_qubits(), std::move(rho)};
}

State apply_local_unitaries(const State &s, std::span<const Mat2> unitaries) {
    return std::visit([&](const auto &x) -> State { return apply_local_unitaries(x, unitaries); }, s);
}

std::vector<double> born_probabilities(const State &s, std::span<const Mat2> unitaries) {
    const unsigned n = n_qubits(s);
    require(unitaries.size() == n, "born_probabilities: one unitary per qubit required");
    std::vector<double> probs(std::size_t{1} << n);
    if (const auto *psi = std::get_if<PureState>(&s)) {
        DenseVector v = psi->amplitudes();
        std::span<Complex> flat(v.data(), static_cast<std::size_t>(v.size()));
        for (unsigned q = 0; q < n; ++q) kernels::apply_1q(flat, q, unitaries[q]);
        kernels::probabilities(flat, probs);
    } else {
        DenseMatrix rho = std::get<DensityState>(s).matrix();
        for (unsigned q = 0; q < n; ++q) conjugate_qubit(rho, n, q, unitaries[q]);
        for (std::size_t i = 0; i < probs.size(); ++i) probs[i] = std::max(0.0, rho(i, i).real());
    }
    return probs;
}

std::vector<std::uint64_t> sample_outcomes(std::span<const double> probs, std::size_t count, std::mt19937_64 &rng) {
    std::vector<double> cumulative(probs.size());
    double acc = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        cumulative[i] = acc;
    }
    require(acc > 0, "sample_outcomes: distribution has zero mass");
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::vector<std::uint64_t> out(count);
    for (auto &o : out) {
        double u = uniform(rng) * acc;
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        if (it == cumulative.end()) --it;
        // Skip zero-probability bins that share a cumulative value with their predecessor.
        while (probs[static_cast<std::size_t>(it - cumulative.begin())] <= 0 && it != cumulative.begin()) --it;
        o = static_cast<std::uint64_t>(it - cumulative.begin());
    }
    return out;
}

std::vector<std::uint64_t> born_sample(const State &s, std::span<const Mat2> unitaries, std::size_t count,
                                       std::mt19937_64 &rng) {
    auto probs = born_probabilities(s, unitaries);
    return sample_outcomes(probs, count, rng);
}

// ---- noise ------------------------------------------------------------------

DensityState apply_noise(const State &s, const NoiseChannel &channel) {
    require(channel.p >= 0 && channel.p <= 1, "apply_noise: probability must lie in [0, 1]");
    DensityState base = to_density(s);
    const unsigned n = base.n_qubits();
    DenseMatrix rho = base.matrix();
    const double p = channel.p;
    switch (channel.kind) {
        case NoiseChannel::Kind::kGlobalDepolarizing: {
            const auto dim = static_cast<double>(base.dim());
            rho = (1 - p) * rho + p * DenseMatrix::Identity(rho.rows(), rho.cols()) / dim;
            break;
        }
        case NoiseChannel::Kind::kBitFlip:
            for (unsigned q = 0; q < n; ++q) {
                DenseMatrix flipped = rho;
                conjugate_qubit(flipped, n, q, kPauliX);
                rho = (1 - p) * rho + p * flipped;
            }
            break;
        case NoiseChannel::Kind::kDepolarizing:
            // (1 - 3p/4) rho + p/4 (X rho X + Y rho Y + Z rho Z) on each qubit.
            for (unsigned q = 0; q < n; ++q) {
                DenseMatrix acc = (1 - 0.75 * p) * rho;
                for (const Mat2 *pauli : {&kPauliX, &kPauliY, &kPauliZ}) {
                    DenseMatrix c = rho;
                    conjugate_qubit(c, n, q, *pauli);
                    acc += 0.25 * p * c;
                }
                rho = std::move(acc);
            }
            break;
    }
    rho = (rho + rho.adjoint()) * 0.5;
    rho /= rho.trace().real();
    return {n, std::move(rho)};
}

// ---- oracles ----------------------------------------------------------------

double oracle_expectation(const State &s, const PauliString &p) {
    const unsigned n = n_qubits(s);
    require(p.n_qubits() == n, "oracle_expectation: qubit count mismatch");
    static const Complex kPhase[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    const unsigned base = p.phase() + static_cast<unsigned>(std::popcount(p.x_mask() & p.z_mask()));
    const std::size_t dim = std::size_t{1} << n;
    Complex acc = 0;
    // <r|P|c> is nonzero only for r = c ^ x.
    if (const auto *psi = std::get_if<PureState>(&s)) {
        const auto &a = psi->amplitudes();
        for (std::size_t c = 0; c < dim; ++c) {
            unsigned ph = base + ((std::popcount(p.z_mask() & c) & 1) ? 2u : 0u);
            acc += std::conj(a(c ^ p.x_mask())) * kPhase[ph & 3u] * a(c);
        }
    } else {
        const auto &rho = std::get<DensityState>(s).matrix();
        for (std::size_t c = 0; c < dim; ++c) {
            unsigned ph = base + ((std::popcount(p.z_mask() & c) & 1) ? 2u : 0u);
            acc += kPhase[ph & 3u] * rho(c, c ^ p.x_mask());
        }
    }
    return acc.real();
}

DenseMatrix reduced_density_matrix(const State &s, const Qubits &qubits) {
    const unsigned n = n_qubits(s);
    Qubits rest = complement(qubits, n);
    const auto keep = scatter_table(qubits);
    const auto trace_out = scatter_table(rest);
    const auto dk = static_cast<Eigen::Index>(keep.size());
    if (const auto *psi = std::get_if<PureState>(&s)) {
        const auto &a = psi->amplitudes();
        DenseMatrix m(dk, static_cast<Eigen::Index>(trace_out.size()));
        for (std::size_t j = 0; j < trace_out.size(); ++j) {
            for (std::size_t i = 0; i < keep.size(); ++i) {
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = a(keep[i] | trace_out[j]);
            }
        }
        return m * m.adjoint();
    }
    const auto &rho = std::get<DensityState>(s).matrix();
    DenseMatrix out = DenseMatrix::Zero(dk, dk);
    for (std::size_t b = 0; b < trace_out.size(); ++b) {
        for (std::size_t j = 0; j < keep.size(); ++j) {
            for (std::size_t i = 0; i < keep.size(); ++i) {
                out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) +=
                    rho(keep[i] | trace_out[b], keep[j] | trace_out[b]);
            }
        }
    }
    return out;
}

double oracle_purity(const State &s, const Qubits &subsystem) {
    const unsigned n = n_qubits(s);
    if (subsystem.empty()) return 1.0;
    // For pure states tr(rho_A^2) = tr(rho_{A^c}^2); use the smaller side.
    if (std::holds_alternative<PureState>(s)) {
        Qubits rest = complement(subsystem, n);
        if (rest.empty()) return 1.0;
        if (rest.size() < subsystem.size()) return reduced_density_matrix(s, rest).squaredNorm();
    }
    return reduced_density_matrix(s, subsystem).squaredNorm();
}

double oracle_renyi2(const State &s, const Qubits &subsystem) { return -std::log2(oracle_purity(s, subsystem)); }

DenseMatrix partial_transpose(const DenseMatrix &m, std::uint64_t transposed_bits) {
    const auto dim = static_cast<std::size_t>(m.rows());
    DenseMatrix out(m.rows(), m.cols());
    for (std::size_t r = 0; r < dim; ++r) {
        for (std::size_t c = 0; c < dim; ++c) {
            // Swap the transposed bits between row and column index.
            std::size_t diff = (r ^ c) & transposed_bits;
            out(static_cast<Eigen::Index>(r ^ diff), static_cast<Eigen::Index>(c ^ diff)) =
                m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
        }
    }
    return out;
}

double oracle_pt_moment(const State &s, const Qubits &a, const Qubits &b, unsigned n) {
    require(!a.empty() && !b.empty(), "oracle_pt_moment: both parties must be nonempty");
    Qubits ab = a;
    ab.insert(ab.end(), b.begin(), b.end());
    DenseMatrix rho_ab = reduced_density_matrix(s, ab);
    DenseMatrix pt = partial_transpose(rho_ab, low_mask(static_cast<unsigned>(a.size())));
    return trace_power(pt, n);
}

double oracle_reflection(const State &s, const Qubits &window) {
    require(!window.empty() && window.size() % 2 == 0, "oracle_reflection: window must have even size");
    DenseMatrix rho = reduced_density_matrix(s, window);
    const std::size_t len = window.size();
    Complex acc = 0;
    for (std::size_t idx = 0; idx < static_cast<std::size_t>(rho.rows()); ++idx) {
        std::size_t reflected = 0;
        for (std::size_t i = 0; i < len; ++i) {
            if ((idx >> i) & 1u) reflected |= std::size_t{1} << (len - 1 - i);
        }
        acc += rho(static_cast<Eigen::Index>(reflected), static_cast<Eigen::Index>(idx));
    }
    return acc.real();
}

double oracle_reflection_normalized(const State &s, const Qubits &window) {
    const std::size_t half = window.size() / 2;
    Qubits left(window.begin(), window.begin() + static_cast<std::ptrdiff_t>(half));
    Qubits right(window.begin() + static_cast<std::ptrdiff_t>(half), window.end());
    double norm = std::sqrt((oracle_purity(s, left) + oracle_purity(s, right)) / 2);
    return oracle_reflection(s, window) / norm;
}

double oracle_otoc(const HamiltonianSpec &h, const PauliString &w, const PauliString &v, double t) {
    if (h.n_qubits() > kMaxHeisenbergQubits) fail(ErrorKind::kSizeCap, "OTOC oracle limited to 10 qubits");
    DenseMatrix wt = heisenberg(w, h, t);
    DenseMatrix vm = to_matrix(v);
    DenseMatrix wv = wt * vm;
    return (wv * wv).trace().real() / static_cast<double>(wt.rows());
}

double oracle_overlap(const State &a, const State &b, const Qubits &subsystem) {
    require(n_qubits(a) == n_qubits(b), "oracle_overlap: qubit count mismatch");
    DenseMatrix ra = reduced_density_matrix(a, subsystem);
    DenseMatrix rb = reduced_density_matrix(b, subsystem);
    return (ra.cwiseProduct(rb.transpose())).sum().real();
}

double oracle_topological_entropy(const State &s, const Qubits &a, const Qubits &b, const Qubits &c) {
    auto join = [](Qubits x, const Qubits &y) {
        x.insert(x.end(), y.begin(), y.end());
        return x;
    };
    return oracle_renyi2(s, a) + oracle_renyi2(s, b) + oracle_renyi2(s, c) - oracle_renyi2(s, join(a, b)) -
           oracle_renyi2(s, join(b, c)) - oracle_renyi2(s, join(a, c)) + oracle_renyi2(s, join(join(a, b), c));
}

}  // namespace rmkit
