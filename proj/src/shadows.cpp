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

#include "rmkit/shadows.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "rmkit/error.hpp"
#include "rmkit/parallel.hpp"
#include "rmkit/protocols.hpp"

namespace rmkit {

namespace {

// Settings per partial sum when accumulating dense matrices; fixed so the
// summation order never depends on the thread count.
constexpr std::size_t kBlock = 64;
constexpr std::size_t kMaxJackknifeGroups = 50;

const Mat2 kLetterMatrix[4] = {
    kIdentity2,
    {Complex{0, 0}, Complex{1, 0}, Complex{1, 0}, Complex{0, 0}},
    {Complex{0, 0}, Complex{0, -1}, Complex{0, 1}, Complex{0, 0}},
    {Complex{1, 0}, Complex{0, 0}, Complex{0, 0}, Complex{-1, 0}},
};

Mat2 transpose(const Mat2 &a) { return {a[0], a[2], a[1], a[3]}; }

void check_subsystem(const MeasurementDataset &ds, const Qubits &qubits, unsigned cap, const char *what) {
    if (qubits.empty()) fail(ErrorKind::kInvalidArgument, std::string(what) + ": subsystem is empty");
    if (qubits.size() > cap) {
        fail(ErrorKind::kSizeCap, std::string(what) + ": subsystem of " + std::to_string(qubits.size()) +
                                      " qubits exceeds the cap of " + std::to_string(cap));
    }
    std::uint64_t seen = 0;
    for (unsigned q : qubits) {
        if (q >= ds.n_qubits()) fail(ErrorKind::kInvalidArgument, std::string(what) + ": qubit out of range");
        if ((seen >> q) & 1u) fail(ErrorKind::kInvalidArgument, std::string(what) + ": repeated qubit");
        seen |= std::uint64_t{1} << q;
    }
    require_independent_unitaries(ds, seen, what);
}

/// Factors on a subsystem together with the distinct restricted outcomes.
struct LocalShadow {
    std::vector<std::array<Mat2, 2>> factors;
    std::vector<std::pair<std::uint64_t, std::size_t>> outcomes;
    std::size_t shots = 0;
};

std::vector<std::pair<std::uint64_t, std::size_t>> group_outcomes(const std::vector<std::uint64_t> &shots,
                                                                  const Qubits &qubits) {
    std::vector<std::uint64_t> bits;
    bits.reserve(shots.size());
    for (auto shot : shots) {
        std::uint64_t b = 0;
        for (std::size_t i = 0; i < qubits.size(); ++i) b |= ((shot >> qubits[i]) & 1u) << i;
        bits.push_back(b);
    }
    std::sort(bits.begin(), bits.end());
    std::vector<std::pair<std::uint64_t, std::size_t>> out;
    for (std::size_t i = 0; i < bits.size();) {
        std::size_t j = i;
        while (j < bits.size() && bits[j] == bits[i]) ++j;
        out.emplace_back(bits[i], j - i);
        i = j;
    }
    return out;
}

LocalShadow local_shadow(const MeasurementRecord &r, const Qubits &qubits, std::uint64_t transposed = 0) {
    LocalShadow s;
    s.shots = r.shots.size();
    for (std::size_t i = 0; i < qubits.size(); ++i) {
        const Mat2 &u = r.setting.unitaries[qubits[i]];
        Mat2 f0 = shadow_factor(u, 0), f1 = shadow_factor(u, 1);
        if ((transposed >> i) & 1u) {
            f0 = transpose(f0);
            f1 = transpose(f1);
        }
        s.factors.push_back({f0, f1});
    }
    s.outcomes = group_outcomes(r.shots, qubits);
    return s;
}

/// acc += weight * (x)_i factors[i][bit i of outcome], qubit i on bit i.
void add_kron(DenseMatrix &acc, const LocalShadow &s, std::uint64_t outcome, double weight,
              std::vector<Complex> &buf, std::vector<Complex> &next) {
    buf.assign(1, Complex(weight, 0));
    std::size_t d = 1;
    for (std::size_t i = 0; i < s.factors.size(); ++i) {
        const Mat2 &g = s.factors[i][(outcome >> i) & 1u];
        const std::size_t D = 2 * d;
        next.resize(D * D);
        for (unsigned b = 0; b < 2; ++b) {
            for (std::size_t c = 0; c < d; ++c) {
                const Complex *col = &buf[c * d];
                for (unsigned a = 0; a < 2; ++a) {
                    const Complex ga = g[2 * a + b];
                    Complex *out = &next[(c + b * d) * D + a * d];
                    for (std::size_t r = 0; r < d; ++r) out[r] = ga * col[r];
                }
            }
        }
        buf.swap(next);
        d = D;
    }
    Complex *dst = acc.data();
    for (std::size_t i = 0; i < d * d; ++i) dst[i] += buf[i];
}

DenseMatrix dense_shadow(const LocalShadow &s) {
    const std::size_t d = std::size_t{1} << s.factors.size();
    DenseMatrix rho = DenseMatrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    std::vector<Complex> buf, next;
    for (const auto &[outcome, count] : s.outcomes) {
        add_kron(rho, s, outcome, static_cast<double>(count) / static_cast<double>(s.shots), buf, next);
    }
    return rho;
}

DenseMatrix dense_shadow(const MeasurementRecord &r, const Qubits &qubits, std::uint64_t transposed = 0) {
    return dense_shadow(local_shadow(r, qubits, transposed));
}

/// Sum over settings of dense restricted snapshots, in fixed blocks.
DenseMatrix shadow_sum(const MeasurementDataset &ds, const Qubits &qubits) {
    const std::size_t M = ds.num_settings();
    const std::size_t blocks = (M + kBlock - 1) / kBlock;
    const auto d = static_cast<Eigen::Index>(std::size_t{1} << qubits.size());
    std::vector<DenseMatrix> partial(blocks);
    parallel_for(blocks, [&](std::size_t b) {
        DenseMatrix acc = DenseMatrix::Zero(d, d);
        for (std::size_t m = b * kBlock; m < std::min(M, (b + 1) * kBlock); ++m) {
            acc += dense_shadow(ds.records()[m], qubits);
        }
        partial[b] = std::move(acc);
    });
    DenseMatrix total = DenseMatrix::Zero(d, d);
    for (const auto &p : partial) total += p;
    return total;
}

double trace_product_real(const DenseMatrix &a, const DenseMatrix &b) {
    // tr(A B) = sum_rc A_rc B_cr.
    return (a.transpose().cwiseProduct(b)).sum().real();
}

JackknifeSample linear_jackknife(const std::vector<double> &samples) {
    const std::size_t M = samples.size();
    JackknifeSample out;
    out.value = pairwise_sum(samples) / static_cast<double>(M);
    if (M >= 2) {
        const double total = pairwise_sum(samples);
        out.replicates.resize(M);
        for (std::size_t m = 0; m < M; ++m) out.replicates[m] = (total - samples[m]) / static_cast<double>(M - 1);
    }
    return out;
}

// ---- multi-copy U-statistics -------------------------------------------------

std::vector<std::vector<unsigned>> nontrivial_cycles(const std::vector<unsigned> &sigma) {
    const unsigned n = static_cast<unsigned>(sigma.size());
    std::vector<bool> seen(n, false);
    std::vector<std::vector<unsigned>> cycles;
    for (unsigned i = 0; i < n; ++i) {
        if (seen[i]) continue;
        std::vector<unsigned> c;
        for (unsigned j = i; !seen[j]; j = sigma[j]) {
            seen[j] = true;
            c.push_back(j);
        }
        if (c.size() > 1) cycles.push_back(std::move(c));
    }
    return cycles;
}

/// All set partitions of {0..n-1} as block labels (restricted growth strings).
std::vector<std::vector<unsigned>> set_partitions(unsigned n) {
    std::vector<std::vector<unsigned>> out;
    std::vector<unsigned> a(n, 0);
    std::function<void(unsigned, unsigned)> rec = [&](unsigned i, unsigned max_label) {
        if (i == n) {
            out.push_back(a);
            return;
        }
        for (unsigned l = 0; l <= max_label + 1; ++l) {
            a[i] = l;
            rec(i + 1, std::max(max_label, l));
        }
    };
    if (n == 0) return {{}};
    a[0] = 0;
    if (n == 1) return {{0}};
    rec(1, 0);
    return out;
}

double factorial(unsigned k) {
    double f = 1;
    for (unsigned i = 2; i <= k; ++i) f *= i;
    return f;
}

/// sum over ordered tuples of distinct indices from `use` of prod_cycles tr(prod Y),
/// divided by the number of such tuples.
double u_statistic(const std::vector<DenseMatrix> &ys, const std::vector<std::size_t> &use,
                   const std::vector<std::vector<unsigned>> &cycles) {
    unsigned n = 0;
    for (const auto &c : cycles) n += static_cast<unsigned>(c.size());
    if (n == 0) return 1.0;
    const std::size_t M = use.size();
    if (M < n) fail(ErrorKind::kNoData, "multi-copy estimate needs at least n settings");
    const auto d = ys.front().rows();
    DenseMatrix S = DenseMatrix::Zero(d, d);
    for (std::size_t m : use) S += ys[m];
    // Positions are numbered cycle by cycle.
    std::vector<std::vector<unsigned>> pos_cycles;
    unsigned p = 0;
    for (const auto &c : cycles) {
        std::vector<unsigned> pc;
        for (std::size_t i = 0; i < c.size(); ++i) pc.push_back(p++);
        pos_cycles.push_back(std::move(pc));
    }
    double total = 0;
    for (const auto &labels : set_partitions(n)) {
        unsigned nblocks = 0;
        for (unsigned l : labels) nblocks = std::max(nblocks, l + 1);
        std::vector<unsigned> size(nblocks, 0);
        for (unsigned l : labels) ++size[l];
        double mu = 1;
        for (unsigned s : size) mu *= ((s - 1) % 2 ? -1.0 : 1.0) * factorial(s - 1);
        std::vector<unsigned> loop_blocks;
        for (unsigned b = 0; b < nblocks; ++b)
            if (size[b] > 1) loop_blocks.push_back(b);
        std::vector<const DenseMatrix *> at(n, &S);
        auto eval = [&]() {
            double prod = 1;
            for (const auto &pc : pos_cycles) {
                DenseMatrix acc = *at[pc[0]];
                for (std::size_t i = 1; i < pc.size(); ++i) acc = acc * *at[pc[i]];
                prod *= acc.trace().real();
            }
            return prod;
        };
        std::function<double(std::size_t)> loop = [&](std::size_t j) -> double {
            if (j == loop_blocks.size()) return eval();
            double sum = 0;
            for (std::size_t m : use) {
                for (unsigned q = 0; q < n; ++q)
                    if (labels[q] == loop_blocks[j]) at[q] = &ys[m];
                sum += loop(j + 1);
            }
            return sum;
        };
        total += mu * loop(0);
    }
    double tuples = 1;
    for (unsigned i = 0; i < n; ++i) tuples *= static_cast<double>(M - i);
    return total / tuples;
}

std::vector<std::pair<std::size_t, std::size_t>> jackknife_groups(std::size_t M) {
    const std::size_t g = std::min(M, kMaxJackknifeGroups);
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t i = 0; i < g; ++i) out.emplace_back(i * M / g, (i + 1) * M / g);
    return out;
}

std::vector<DenseMatrix> multicopy_matrices(const MeasurementDataset &ds, const CopyPermutation &op, Qubits &all) {
    all = op.forward;
    all.insert(all.end(), op.inverse.begin(), op.inverse.end());
    check_subsystem(ds, all, kMaxMulticopyQubits, "multicopy");
    std::uint64_t transposed = 0;
    for (std::size_t i = op.forward.size(); i < all.size(); ++i) transposed |= std::uint64_t{1} << i;
    std::vector<DenseMatrix> ys(ds.num_settings());
    parallel_for(ys.size(), [&](std::size_t m) { ys[m] = dense_shadow(ds.records()[m], all, transposed); });
    return ys;
}

JackknifeSample multicopy_from(const std::vector<DenseMatrix> &ys, const std::vector<std::vector<unsigned>> &cycles) {
    const std::size_t M = ys.size();
    std::vector<std::size_t> everything(M);
    for (std::size_t m = 0; m < M; ++m) everything[m] = m;
    JackknifeSample out;
    out.value = u_statistic(ys, everything, cycles);
    unsigned n = 0;
    for (const auto &c : cycles) n += static_cast<unsigned>(c.size());
    if (n == 0) {
        out.replicates.assign(std::min(M, kMaxJackknifeGroups), 1.0);
        return out;
    }
    const auto groups = jackknife_groups(M);
    if (M - (groups.front().second - groups.front().first) < n || groups.size() < 2) return out;
    out.replicates.resize(groups.size());
    parallel_for(groups.size(), [&](std::size_t g) {
        std::vector<std::size_t> keep;
        for (std::size_t m = 0; m < M; ++m)
            if (m < groups[g].first || m >= groups[g].second) keep.push_back(m);
        out.replicates[g] = u_statistic(ys, keep, cycles);
    });
    return out;
}

JackknifeSample purity_for(const MeasurementDataset &ds, const Qubits &q, PurityMethod method) {
    return method == PurityMethod::kHamming ? purity_hamming_jackknife(ds, q) : purity_shadow_jackknife(ds, q);
}

}  // namespace

Mat2 shadow_factor(const Mat2 &u, unsigned bit) {
    // U^dagger |b> has components conj(U[b][i]).
    const Complex v0 = std::conj(u[2 * bit]), v1 = std::conj(u[2 * bit + 1]);
    return {3.0 * v0 * std::conj(v0) - 1.0, 3.0 * v0 * std::conj(v1), 3.0 * v1 * std::conj(v0),
            3.0 * v1 * std::conj(v1) - 1.0};
}

Mat2 ShadowSnapshot::averaged_factor(unsigned q) const {
    std::size_t ones = 0;
    for (auto s : shots) ones += (s >> q) & 1u;
    const double w1 = static_cast<double>(ones) / static_cast<double>(shots.size()), w0 = 1 - w1;
    Mat2 out;
    for (int i = 0; i < 4; ++i) out[i] = w0 * factors[q][0][i] + w1 * factors[q][1][i];
    return out;
}

DenseMatrix ShadowSnapshot::dense(const Qubits &qubits) const {
    LocalShadow s;
    s.shots = shots.size();
    for (unsigned q : qubits) {
        require(q < n_qubits(), "ShadowSnapshot::dense: qubit out of range");
        s.factors.push_back(factors[q]);
    }
    s.outcomes = group_outcomes(shots, qubits);
    return dense_shadow(s);
}

ShadowSnapshot build_snapshot(const MeasurementRecord &r) {
    ShadowSnapshot s;
    s.m = r.index();
    s.shots = r.shots;
    for (const auto &u : r.setting.unitaries) s.factors.push_back({shadow_factor(u, 0), shadow_factor(u, 1)});
    return s;
}

std::size_t count_compatible(const MeasurementDataset &ds, const PauliString &p) {
    require(p.n_qubits() == ds.n_qubits(), "count_compatible: width mismatch");
    if (ds.ensemble() != EnsembleKind::kClifford) fail(ErrorKind::kInvalidArgument, "compatibility needs Clifford data");
    std::size_t c = 0;
    for (const auto &r : ds.records()) c += is_compatible(p, *r.setting.basis) ? 1 : 0;
    return c;
}

std::vector<double> pauli_samples(const MeasurementDataset &ds, const PauliString &p, PredictionPath path) {
    require(p.n_qubits() == ds.n_qubits(), "predict_pauli: observable width differs from the dataset");
    const double sign = p.real_sign();
    const std::size_t M = ds.num_settings();
    std::vector<double> v(M, 0.0);
    if (p.is_identity()) {
        std::fill(v.begin(), v.end(), sign);
        return v;
    }
    if (path == PredictionPath::kAuto) {
        path = ds.ensemble() == EnsembleKind::kClifford ? PredictionPath::kCompatibility : PredictionPath::kSnapshot;
    }
    const std::uint64_t support = p.support();
    require_independent_unitaries(ds, support, "predict_pauli");
    if (path == PredictionPath::kCompatibility) {
        if (ds.ensemble() != EnsembleKind::kClifford) {
            fail(ErrorKind::kInvalidArgument, "predict_pauli: the compatibility path needs a Clifford dataset");
        }
        const double scale = std::pow(3.0, p.weight()) * sign;
        std::size_t compatible = 0;
        for (std::size_t m = 0; m < M; ++m) {
            const auto &r = ds.records()[m];
            const BasisString &b = *r.setting.basis;
            if (!is_compatible(p, b)) continue;
            ++compatible;
            // Outcome parity on the support, corrected by the basis signs.
            const std::uint64_t flip = b.negative_mask() & support;
            long long acc = 0;
            for (auto s : r.shots) acc += (std::popcount((s ^ flip) & support) & 1) ? -1 : 1;
            v[m] = scale * static_cast<double>(acc) / static_cast<double>(r.shots.size());
        }
        if (compatible == 0) {
            throw NoDataError("predict_pauli: no setting is compatible with " + p.str(), 0);
        }
        return v;
    }
    std::vector<unsigned> sites;
    for (unsigned q = 0; q < p.n_qubits(); ++q)
        if ((support >> q) & 1u) sites.push_back(q);
    parallel_for(M, [&](std::size_t m) {
        const auto &r = ds.records()[m];
        std::vector<std::array<double, 2>> t(sites.size());
        for (std::size_t i = 0; i < sites.size(); ++i) {
            const Mat2 &P = kLetterMatrix[static_cast<int>(p.letter(sites[i]))];
            const Mat2 &u = r.setting.unitaries[sites[i]];
            for (unsigned b = 0; b < 2; ++b) t[i][b] = trace_product(P, shadow_factor(u, b)).real();
        }
        std::vector<double> per_shot(r.shots.size());
        for (std::size_t k = 0; k < r.shots.size(); ++k) {
            double prod = sign;
            for (std::size_t i = 0; i < sites.size(); ++i) prod *= t[i][(r.shots[k] >> sites[i]) & 1u];
            per_shot[k] = prod;
        }
        v[m] = pairwise_sum(per_shot) / static_cast<double>(r.shots.size());
    });
    return v;
}

EstimateWithError predict_pauli(const MeasurementDataset &ds, const PauliString &p, PredictionPath path,
                                const AggregateOptions &agg) {
    auto v = pauli_samples(ds, p, path);
    return aggregate(v, agg);
}

std::vector<double> observable_samples(const MeasurementDataset &ds, const DenseMatrix &o, const Qubits &qubits) {
    check_subsystem(ds, qubits, kMaxShadowSubsystem, "predict_observable");
    const auto d = static_cast<Eigen::Index>(std::size_t{1} << qubits.size());
    require(o.rows() == d && o.cols() == d, "predict_observable: operator size does not match the subsystem");
    std::vector<double> v(ds.num_settings());
    parallel_for(v.size(), [&](std::size_t m) {
        v[m] = trace_product_real(o, dense_shadow(ds.records()[m], qubits));
    });
    return v;
}

EstimateWithError predict_observable(const MeasurementDataset &ds, const DenseMatrix &o, const Qubits &qubits,
                                     const AggregateOptions &agg) {
    auto v = observable_samples(ds, o, qubits);
    return aggregate(v, agg);
}

DenseMatrix estimate_subsystem_state(const MeasurementDataset &ds, const Qubits &qubits) {
    check_subsystem(ds, qubits, kMaxShadowSubsystem, "estimate_subsystem_state");
    if (ds.num_settings() == 0) fail(ErrorKind::kNoData, "estimate_subsystem_state: empty dataset");
    return shadow_sum(ds, qubits) / static_cast<double>(ds.num_settings());
}

JackknifeSample purity_shadow_jackknife(const MeasurementDataset &ds, const Qubits &qubits) {
    check_subsystem(ds, qubits, kMaxShadowSubsystem, "purity_shadow");
    const std::size_t M = ds.num_settings();
    if (M < 2) fail(ErrorKind::kNoData, "purity_shadow: needs at least two settings");
    const DenseMatrix S = shadow_sum(ds, qubits);
    std::vector<double> self(M), cross(M);
    parallel_for(M, [&](std::size_t m) {
        DenseMatrix rho = dense_shadow(ds.records()[m], qubits);
        self[m] = rho.squaredNorm();
        cross[m] = trace_product_real(S, rho);
    });
    const double trS2 = S.squaredNorm();
    const double T = pairwise_sum(self);
    const double Md = static_cast<double>(M);
    JackknifeSample out;
    out.value = (trS2 - T) / (Md * (Md - 1));
    if (M >= 3) {
        out.replicates.resize(M);
        for (std::size_t m = 0; m < M; ++m) {
            const double s2 = trS2 - 2 * cross[m] + self[m];
            out.replicates[m] = (s2 - (T - self[m])) / ((Md - 1) * (Md - 2));
        }
    }
    return out;
}

EstimateWithError purity_shadow(const MeasurementDataset &ds, const Qubits &qubits) {
    auto e = from_jackknife(purity_shadow_jackknife(ds, qubits), ds.num_settings());
    e.method = "shadow_u_statistic";
    return e;
}

EstimateWithError renyi2_from_purity(const EstimateWithError &purity) {
    EstimateWithError e;
    e.n_samples = purity.n_samples;
    e.method = purity.method + "+delta";
    if (!(purity.value > 0)) {
        e.value = std::nan("");
        e.std_error = std::nan("");
        e.flagged = true;
        e.flag_reason = "nonpositive purity estimate";
        return e;
    }
    e.value = -std::log2(purity.value);
    e.std_error = purity.std_error / (purity.value * std::log(2.0));
    return e;
}

EstimateWithError renyi2(const MeasurementDataset &ds, const Qubits &qubits, PurityMethod method) {
    auto p = method == PurityMethod::kHamming ? purity_hamming(ds, qubits) : purity_shadow(ds, qubits);
    return renyi2_from_purity(p);
}

CopyPermutation cyclic_permutation(unsigned n, const Qubits &qubits) {
    CopyPermutation op;
    for (unsigned i = 0; i < n; ++i) op.sigma.push_back((i + 1) % n);
    op.forward = qubits;
    return op;
}

JackknifeSample multicopy_jackknife(const MeasurementDataset &ds, const CopyPermutation &op) {
    const unsigned n = static_cast<unsigned>(op.sigma.size());
    if (n < 1 || n > 4) fail(ErrorKind::kInvalidArgument, "multicopy: number of copies must lie in [1, 4]");
    std::vector<bool> hit(n, false);
    for (unsigned s : op.sigma) {
        if (s >= n || hit[s]) fail(ErrorKind::kInvalidArgument, "multicopy: sigma is not a permutation");
        hit[s] = true;
    }
    if (ds.num_settings() < n) fail(ErrorKind::kNoData, "multicopy: fewer settings than copies");
    Qubits all;
    auto ys = multicopy_matrices(ds, op, all);
    return multicopy_from(ys, nontrivial_cycles(op.sigma));
}

EstimateWithError multicopy_expect(const MeasurementDataset &ds, const CopyPermutation &op) {
    auto e = from_jackknife(multicopy_jackknife(ds, op), ds.num_settings());
    e.method = "u_statistic(" + std::to_string(op.sigma.size()) + ")";
    return e;
}

EstimateWithError pt_moment(const MeasurementDataset &ds, const Qubits &a, const Qubits &b, unsigned n) {
    CopyPermutation op = cyclic_permutation(n, a);
    op.inverse = b;
    auto e = multicopy_expect(ds, op);
    e.method = "pt_moment(" + std::to_string(n) + ")";
    return e;
}

PptTestResult p3_ppt_test(const MeasurementDataset &ds, const Qubits &a, const Qubits &b, double z) {
    if (ds.num_settings() < 3) fail(ErrorKind::kNoData, "p3_ppt_test: needs at least three settings");
    CopyPermutation op = cyclic_permutation(3, a);
    op.inverse = b;
    Qubits all;
    auto ys = multicopy_matrices(ds, op, all);
    auto p2 = multicopy_from(ys, {{0, 1}});
    auto p3 = multicopy_from(ys, {{0, 1, 2}});
    auto p2sq = transform(p2, [](double x) { return x * x; });
    auto diff = combine({&p3, &p2}, [](const std::vector<double> &v) { return v[0] - v[1] * v[1]; });
    PptTestResult r;
    r.z = z;
    r.p2 = from_jackknife(p2, ds.num_settings());
    r.p3 = from_jackknife(p3, ds.num_settings());
    r.difference = from_jackknife(diff, ds.num_settings());
    const double sigma_sq = jackknife_error(p2sq.replicates);
    const double denom = r.p3.std_error + sigma_sq;
    const double gap = p2sq.value - p3.value;
    r.margin = denom > 0 ? gap / denom : (gap > 0 ? INFINITY : -INFINITY);
    r.entangled = p3.value + z * r.p3.std_error < p2sq.value - z * sigma_sq;
    return r;
}

DenseMatrix reflection_operator(unsigned n_window) {
    require(n_window <= kMaxShadowSubsystem, "reflection_operator: window too large");
    const std::size_t d = std::size_t{1} << n_window;
    DenseMatrix r = DenseMatrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (std::size_t b = 0; b < d; ++b) {
        std::size_t rev = 0;
        for (unsigned i = 0; i < n_window; ++i) rev |= ((b >> i) & 1u) << (n_window - 1 - i);
        r(static_cast<Eigen::Index>(rev), static_cast<Eigen::Index>(b)) = 1.0;
    }
    return r;
}

ReflectionResult reflection_invariant(const MeasurementDataset &ds, const Qubits &window) {
    if (window.empty() || window.size() % 2 != 0) {
        fail(ErrorKind::kInvalidArgument, "reflection_invariant: window must have even, nonzero size");
    }
    const std::size_t L = window.size(), M = ds.num_settings();
    // Mirrored acquisition shares one unitary per pair; the pair estimator
    // then becomes E[3 delta(s_i, s_j) - 1] (two-design twirl onto {I, SWAP}).
    const bool mirrored = ds.header().window.has_value();
    if (mirrored) {
        if (*ds.header().window != window) {
            fail(ErrorKind::kProtocol, "reflection_invariant: window differs from the symmetric acquisition window");
        }
        check_subsystem(ds, Qubits(window.begin(), window.begin() + static_cast<std::ptrdiff_t>(L / 2)),
                        kMaxShadowSubsystem, "reflection_invariant");
        if (L > kMaxShadowSubsystem) fail(ErrorKind::kSizeCap, "reflection_invariant: window exceeds the cap of 8");
    } else {
        check_subsystem(ds, window, kMaxShadowSubsystem, "reflection_invariant");
    }
    if (M < 3) fail(ErrorKind::kNoData, "reflection_invariant: needs at least three settings");
    std::vector<double> z(M);
    parallel_for(M, [&](std::size_t m) {
        const auto &r = ds.records()[m];
        // tr(SWAP (f (x) g)) = tr(f g), so each mirrored pair contributes one 2x2 trace.
        std::vector<std::array<std::array<double, 2>, 2>> pair_trace(L / 2);
        for (std::size_t i = 0; i < L / 2; ++i) {
            const Mat2 &u = r.setting.unitaries[window[i]];
            const Mat2 &w = r.setting.unitaries[window[L - 1 - i]];
            for (unsigned a = 0; a < 2; ++a)
                for (unsigned b = 0; b < 2; ++b)
                    pair_trace[i][a][b] = mirrored ? (a == b ? 2.0 : -1.0)
                                                   : trace_product(shadow_factor(u, a), shadow_factor(w, b)).real();
        }
        std::vector<double> per_shot(r.shots.size());
        for (std::size_t k = 0; k < r.shots.size(); ++k) {
            double prod = 1;
            for (std::size_t i = 0; i < L / 2; ++i) {
                prod *= pair_trace[i][(r.shots[k] >> window[i]) & 1u][(r.shots[k] >> window[L - 1 - i]) & 1u];
            }
            per_shot[k] = prod;
        }
        z[m] = pairwise_sum(per_shot) / static_cast<double>(r.shots.size());
    });
    const Qubits left(window.begin(), window.begin() + static_cast<std::ptrdiff_t>(L / 2));
    const Qubits right(window.begin() + static_cast<std::ptrdiff_t>(L / 2), window.end());
    auto zr = linear_jackknife(z);
    auto pl = purity_shadow_jackknife(ds, left);
    auto pr = purity_shadow_jackknife(ds, right);
    auto normalized = combine({&zr, &pl, &pr}, [](const std::vector<double> &v) {
        const double mean = 0.5 * (v[1] + v[2]);
        return mean > 0 ? v[0] / std::sqrt(mean) : std::nan("");
    });
    ReflectionResult out;
    out.z_r = from_jackknife(zr, M);
    out.z_r.method = mirrored ? "mirrored_pairs" : "shadow_mean";
    out.purity_left = from_jackknife(pl, M);
    out.purity_right = from_jackknife(pr, M);
    out.z_normalized = from_jackknife(normalized, M);
    if (!std::isfinite(normalized.value)) {
        out.z_normalized.flagged = true;
        out.z_normalized.flag_reason = "nonpositive half-window purity";
    }
    return out;
}

EstimateWithError topological_entropy(const MeasurementDataset &ds, const Qubits &a, const Qubits &b,
                                      const Qubits &c, PurityMethod method) {
    auto join = [](std::initializer_list<const Qubits *> parts) {
        Qubits out;
        for (const auto *p : parts) out.insert(out.end(), p->begin(), p->end());
        return out;
    };
    const std::vector<std::pair<Qubits, double>> terms = {
        {a, 1.0}, {b, 1.0}, {c, 1.0}, {join({&a, &b}), -1.0}, {join({&b, &c}), -1.0}, {join({&a, &c}), -1.0},
        {join({&a, &b, &c}), 1.0},
    };
    check_subsystem(ds, terms.back().first, 64, "topological_entropy");
    std::vector<JackknifeSample> purities;
    for (const auto &t : terms) purities.push_back(purity_for(ds, t.first, method));
    std::vector<const JackknifeSample *> ptrs;
    for (const auto &p : purities) ptrs.push_back(&p);
    auto stop = combine(ptrs, [&](const std::vector<double> &v) {
        double s = 0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!(v[i] > 0)) return std::nan("");
            s += terms[i].second * -std::log2(v[i]);
        }
        return s;
    });
    auto e = from_jackknife(stop, ds.num_settings());
    e.method = method == PurityMethod::kHamming ? "kitaev_preskill(hamming)" : "kitaev_preskill(shadow)";
    if (!std::isfinite(stop.value)) {
        e.flagged = true;
        e.flag_reason = "an ingredient purity is nonpositive";
    } else if (!std::isfinite(e.std_error)) {
        e.flagged = true;
        e.flag_reason = "an ingredient purity is nonpositive in a jackknife replicate";
    }
    return e;
}

}  // namespace rmkit
