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

#include "rmkit/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "rmkit/error.hpp"
#include "rmkit/kernels.hpp"
#include "rmkit/parallel.hpp"

namespace rmkit {

using nlohmann::json;

namespace {

std::uint64_t subsystem_mask(const MeasurementDataset &ds, const Qubits &qubits, unsigned cap, const char *what) {
    if (qubits.empty()) fail(ErrorKind::kInvalidArgument, std::string(what) + ": subsystem is empty");
    if (qubits.size() > cap) {
        fail(ErrorKind::kSizeCap, std::string(what) + ": subsystem of " + std::to_string(qubits.size()) +
                                      " qubits exceeds the cap of " + std::to_string(cap));
    }
    std::uint64_t mask = 0;
    for (unsigned q : qubits) {
        if (q >= ds.n_qubits()) fail(ErrorKind::kInvalidArgument, std::string(what) + ": qubit out of range");
        if ((mask >> q) & 1u) fail(ErrorKind::kInvalidArgument, std::string(what) + ": repeated qubit");
        mask |= std::uint64_t{1} << q;
    }
    require_independent_unitaries(ds, mask, what);
    return mask;
}

/// sum_d hist[d] (-2)^{-d}, in increasing d.
double weighted_histogram(std::span<const std::uint64_t> hist) {
    double s = 0;
    for (std::size_t d = 0; d < hist.size(); ++d) {
        if (hist[d] == 0) continue;
        const double w = std::ldexp(d % 2 ? -1.0 : 1.0, -static_cast<int>(d));
        s += static_cast<double>(hist[d]) * w;
    }
    return s;
}

JackknifeSample linear_jackknife(const std::vector<double> &samples) {
    const std::size_t M = samples.size();
    JackknifeSample out;
    const double total = pairwise_sum(samples);
    out.value = total / static_cast<double>(M);
    if (M >= 2) {
        out.replicates.resize(M);
        for (std::size_t m = 0; m < M; ++m) out.replicates[m] = (total - samples[m]) / static_cast<double>(M - 1);
    }
    return out;
}

/// Ratio of means with leave-one-out replicates.
JackknifeSample ratio_jackknife(const std::vector<double> &num, const std::vector<double> &den) {
    auto n = linear_jackknife(num), d = linear_jackknife(den);
    return combine({&n, &d}, [](const std::vector<double> &v) { return v[0] / v[1]; });
}

}  // namespace

// ---- purity and overlaps -------------------------------------------------------

std::vector<double> purity_hamming_samples(const MeasurementDataset &ds, const Qubits &qubits) {
    const std::uint64_t mask = subsystem_mask(ds, qubits, kMaxHammingSubsystem, "purity_hamming");
    const std::size_t K = ds.shots_per_setting();
    if (K < 2) fail(ErrorKind::kInvalidArgument, "purity_hamming: needs K >= 2 shots per setting");
    const double scale = std::ldexp(1.0, static_cast<int>(qubits.size())) / (static_cast<double>(K) * (K - 1));
    std::vector<double> v(ds.num_settings());
    parallel_for(v.size(), [&](std::size_t m) {
        std::vector<std::uint64_t> hist(kernels::kHistogramBins, 0);
        kernels::hamming_histogram_self(ds.records()[m].shots, mask, hist);
        v[m] = scale * weighted_histogram(hist);
    });
    return v;
}

JackknifeSample purity_hamming_jackknife(const MeasurementDataset &ds, const Qubits &qubits) {
    return linear_jackknife(purity_hamming_samples(ds, qubits));
}

EstimateWithError purity_hamming(const MeasurementDataset &ds, const Qubits &qubits, const AggregateOptions &agg) {
    auto e = aggregate(purity_hamming_samples(ds, qubits), agg);
    e.method = "hamming_" + e.method;
    return e;
}

void check_same_protocol(const MeasurementDataset &a, const MeasurementDataset &b) {
    const auto &ha = a.header(), &hb = b.header();
    auto violation = [](const std::string &msg) { fail(ErrorKind::kProtocol, "protocol violation: " + msg); };
    if (ha.n_qubits != hb.n_qubits) violation("qubit counts differ");
    if (ha.ensemble != hb.ensemble) violation("ensembles differ");
    if (ha.seed != hb.seed) violation("setting seeds differ, so the unitaries were not shared");
    if (a.num_settings() != b.num_settings()) violation("setting counts differ");
    if (ha.qubits != hb.qubits) violation("the datasets are restricted to different qubits");
    if (ha.shot_seed == hb.shot_seed) {
        violation("both datasets use shot seed " + std::to_string(ha.shot_seed) +
                  "; independent devices need independent outcome streams");
    }
    for (std::size_t m = 0; m < a.num_settings(); ++m) {
        const auto &sa = a.records()[m].setting, &sb = b.records()[m].setting;
        if (sa.index != sb.index || sa.unitaries != sb.unitaries) violation("setting " + std::to_string(m) + " differs");
    }
}

std::vector<double> cross_overlap_samples(const MeasurementDataset &a, const MeasurementDataset &b,
                                          const Qubits &qubits) {
    check_same_protocol(a, b);
    const std::uint64_t mask = subsystem_mask(a, qubits, kMaxHammingSubsystem, "cross_overlap");
    const double scale = std::ldexp(1.0, static_cast<int>(qubits.size())) /
                         (static_cast<double>(a.shots_per_setting()) * static_cast<double>(b.shots_per_setting()));
    std::vector<double> v(a.num_settings());
    parallel_for(v.size(), [&](std::size_t m) {
        std::vector<std::uint64_t> hist(kernels::kHistogramBins, 0);
        kernels::hamming_histogram(a.records()[m].shots, b.records()[m].shots, mask, hist);
        v[m] = scale * weighted_histogram(hist);
    });
    return v;
}

JackknifeSample cross_overlap_jackknife(const MeasurementDataset &a, const MeasurementDataset &b,
                                        const Qubits &qubits) {
    return linear_jackknife(cross_overlap_samples(a, b, qubits));
}

EstimateWithError cross_overlap(const MeasurementDataset &a, const MeasurementDataset &b, const Qubits &qubits) {
    auto e = mean_estimate(cross_overlap_samples(a, b, qubits));
    e.method = "hamming_cross";
    return e;
}

EstimateWithError cross_overlap_shadow(const MeasurementDataset &a, const MeasurementDataset &b,
                                       const Qubits &qubits) {
    if (a.n_qubits() != b.n_qubits()) fail(ErrorKind::kProtocol, "protocol violation: qubit counts differ");
    const DenseMatrix mean_a = estimate_subsystem_state(a, qubits);
    const DenseMatrix mean_b = estimate_subsystem_state(b, qubits);
    // tr(rho_a rho_b) is linear in each shadow separately, so the two
    // per-dataset sampling errors add in quadrature.
    auto ea = mean_estimate(observable_samples(a, mean_b, qubits));
    auto eb = mean_estimate(observable_samples(b, mean_a, qubits));
    EstimateWithError e;
    e.value = ea.value;
    e.std_error = std::sqrt(ea.std_error * ea.std_error + eb.std_error * eb.std_error);
    e.n_samples = a.num_settings() + b.num_settings();
    e.method = "shadow_cross";
    return e;
}

FmaxResult fmax(const MeasurementDataset &a, const MeasurementDataset &b, const Qubits &qubits) {
    auto overlap = cross_overlap_jackknife(a, b, qubits);
    auto pa = purity_hamming_jackknife(a, qubits);
    auto pb = purity_hamming_jackknife(b, qubits);
    auto f = combine({&overlap, &pa, &pb}, [](const std::vector<double> &v) {
        const double den = std::max(v[1], v[2]);
        return den > 0 ? v[0] / den : std::nan("");
    });
    const std::size_t M = a.num_settings();
    FmaxResult r;
    r.overlap = from_jackknife(overlap, M);
    r.purity_a = from_jackknife(pa, M);
    r.purity_b = from_jackknife(pb, M);
    r.fmax = from_jackknife(f, M);
    r.fmax.method = "fmax_jackknife";
    if (!std::isfinite(f.value)) {
        r.fmax.flagged = true;
        r.fmax.flag_reason = "nonpositive purity in the denominator";
    } else if (f.value < -0.1 || f.value > 1.1) {
        r.fmax.flagged = true;
        r.fmax.flag_reason = "F_max outside [-0.1, 1.1]";
    }
    return r;
}

// ---- DFE ---------------------------------------------------------------------------

std::vector<double> pauli_decomposition(const PureState &target) {
    const unsigned n = target.n_qubits();
    if (n > 8) fail(ErrorKind::kSizeCap, "pauli_decomposition: needs N <= 8 (4^N coefficients)");
    const std::size_t d = target.dim();
    const auto &psi = target.amplitudes();
    std::vector<double> out(d * d);
    parallel_for(d, [&](std::size_t x) {
        std::vector<Complex> a(d);
        for (std::size_t c = 0; c < d; ++c) a[c] = std::conj(psi[static_cast<Eigen::Index>(c ^ x)]) * psi[static_cast<Eigen::Index>(c)];
        // Walsh-Hadamard transform over c gives sum_c a[c] (-1)^{z.c} for every z.
        for (std::size_t h = 1; h < d; h <<= 1) {
            for (std::size_t i = 0; i < d; i += 2 * h) {
                for (std::size_t j = i; j < i + h; ++j) {
                    Complex u = a[j], v = a[j + h];
                    a[j] = u + v;
                    a[j + h] = u - v;
                }
            }
        }
        for (std::size_t z = 0; z < d; ++z) {
            const int y = std::popcount(x & z) % 4;
            static const Complex ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
            out[x | (z << n)] = (ipow[y] * a[z]).real();
        }
    });
    return out;
}

DfePlan dfe_plan(const PureState &target, std::size_t samples, std::uint64_t seed, const std::string &label) {
    if (samples == 0) fail(ErrorKind::kConfig, "dfe_plan: need at least one sample");
    const unsigned n = target.n_qubits();
    const auto coeffs = pauli_decomposition(target);
    const double dim = static_cast<double>(target.dim());
    std::vector<double> probs(coeffs.size());
    for (std::size_t j = 0; j < coeffs.size(); ++j) {
        const double p = coeffs[j] * coeffs[j] / dim;
        // |b_j| below 1e-12 is unsampleable noise from the decomposition.
        probs[j] = p > 1e-24 ? p : 0.0;
    }
    std::mt19937_64 rng(mix_seed(seed, 0xdfe));
    auto draws = sample_outcomes(probs, samples, rng);
    std::map<std::uint64_t, std::size_t> counts;
    for (auto j : draws) ++counts[j];
    DfePlan plan;
    plan.target_label = label;
    plan.n_qubits = n;
    plan.seed = seed;
    plan.samples = samples;
    const std::uint64_t low = low_mask(n);
    for (const auto &[j, c] : counts) {
        plan.paulis.emplace_back(n, j & low, j >> n, 0);
        plan.multiplicity.push_back(c);
        plan.b.push_back(coeffs[j] / std::sqrt(dim));
    }
    return plan;
}

json DfePlan::to_json() const {
    json terms = json::array();
    for (std::size_t i = 0; i < paulis.size(); ++i) {
        terms.push_back({{"pauli", paulis[i].str()}, {"count", multiplicity[i]}, {"b", b[i]}});
    }
    return {{"schema", "rmdfe/1"}, {"target", target_label}, {"n", n_qubits},
            {"seed", seed},         {"samples", samples},    {"terms", terms}};
}

DfePlan DfePlan::from_json(const json &j) {
    try {
        if (j.at("schema").get<std::string>() != "rmdfe/1") fail(ErrorKind::kVersion, "DFE plan: unsupported schema");
        DfePlan p;
        p.target_label = j.at("target").get<std::string>();
        p.n_qubits = j.at("n").get<unsigned>();
        p.seed = j.at("seed").get<std::uint64_t>();
        p.samples = j.at("samples").get<std::size_t>();
        std::size_t total = 0;
        for (const auto &t : j.at("terms")) {
            p.paulis.push_back(PauliString::from_string(t.at("pauli").get<std::string>()));
            p.multiplicity.push_back(t.at("count").get<std::size_t>());
            p.b.push_back(t.at("b").get<double>());
            total += p.multiplicity.back();
            if (p.paulis.back().n_qubits() != p.n_qubits) fail(ErrorKind::kInvariant, "DFE plan: Pauli width differs from n");
            if (std::abs(p.b.back()) <= 1e-12) fail(ErrorKind::kInvariant, "DFE plan: sampled term with b = 0");
        }
        if (total != p.samples) fail(ErrorKind::kInvariant, "DFE plan: term counts do not add up to samples");
        return p;
    } catch (const json::exception &e) {
        fail(ErrorKind::kMalformed, std::string("DFE plan: ") + e.what());
    }
}

DfeResult dfe_estimate(const DfePlan &plan, const MeasurementDataset &ds) {
    if (plan.n_qubits != ds.n_qubits()) fail(ErrorKind::kInvalidArgument, "dfe_estimate: plan and dataset widths differ");
    const std::size_t M = ds.num_settings();
    const double root = std::sqrt(std::ldexp(1.0, static_cast<int>(plan.n_qubits)));
    DfeResult r;
    struct Term {
        std::size_t count;
        double tr_target;
        double total;
        std::vector<double> samples;
    };
    std::vector<Term> terms;
    for (std::size_t i = 0; i < plan.paulis.size(); ++i) {
        try {
            auto v = pauli_samples(ds, plan.paulis[i]);
            const double total = pairwise_sum(v);
            terms.push_back({plan.multiplicity[i], plan.b[i] * root, total, std::move(v)});
        } catch (const NoDataError &) {
            r.skipped += plan.multiplicity[i];
            r.skipped_paulis.push_back(plan.paulis[i].str());
        }
    }
    for (const auto &t : terms) r.effective_samples += t.count;
    if (r.effective_samples == 0) fail(ErrorKind::kNoData, "dfe_estimate: no sampled Pauli has a compatible setting");
    const double L = static_cast<double>(r.effective_samples);
    std::vector<double> ratios;
    for (const auto &t : terms) {
        const double ratio = t.total / static_cast<double>(M) / t.tr_target;
        for (std::size_t c = 0; c < t.count; ++c) ratios.push_back(ratio);
    }
    auto draw = mean_estimate(ratios);
    // Leave-one-setting-out replicates of the fidelity for the shared measurement noise.
    std::vector<double> replicates(M, 0.0);
    if (M >= 2) {
        parallel_for(M, [&](std::size_t m) {
            double f = 0;
            for (const auto &t : terms) {
                f += static_cast<double>(t.count) * (t.total - t.samples[m]) / static_cast<double>(M - 1) / t.tr_target;
            }
            replicates[m] = f / L;
        });
    }
    const double jk = M >= 2 ? jackknife_error(replicates) : 0.0;
    r.fidelity.value = draw.value;
    r.fidelity.std_error = std::sqrt(draw.std_error * draw.std_error + jk * jk);
    r.fidelity.n_samples = r.effective_samples;
    r.fidelity.method = "dfe_importance";
    if (r.skipped > 0) {
        r.fidelity.flagged = true;
        r.fidelity.flag_reason = std::to_string(r.skipped) + " draws had no compatible setting";
    }
    return r;
}

// ---- OTOC --------------------------------------------------------------------------

OtocRun otoc_run(const HamiltonianSpec &h, const PauliString &w, const PauliString &v,
                 const std::vector<double> &times, const EnsembleSpec &e, std::size_t M, std::uint64_t seed,
                 const OtocOptions &options) {
    const unsigned n = h.n_qubits();
    if (n > kMaxHeisenbergQubits) {
        fail(ErrorKind::kSizeCap, "otoc_run: " + std::to_string(n) + " qubits exceeds the cap of " +
                                      std::to_string(kMaxHeisenbergQubits));
    }
    require(w.n_qubits() == n && v.n_qubits() == n && e.n_qubits == n, "otoc_run: widths differ");
    require(w.is_hermitian() && v.is_hermitian(), "otoc_run: W and V must be Hermitian Paulis");
    if (M < 2) fail(ErrorKind::kConfig, "otoc_run: needs at least two settings");
    if (times.empty()) fail(ErrorKind::kConfig, "otoc_run: no times given");
    const std::size_t d = std::size_t{1} << n;
    OtocRun run;
    run.hamiltonian = h;
    run.w = w;
    run.v = v;
    run.times = times;
    run.ensemble = e.kind;
    run.settings = M;
    run.seed = seed;
    run.options = options;
    const std::size_t T = times.size();
    auto shape = [&] {
        return std::vector<std::vector<std::vector<double>>>(T, std::vector<std::vector<double>>(M));
    };
    run.w1 = shape();
    run.w2 = shape();
    if (options.shots > 0) run.w1_repeat = shape();
    auto prop = propagator_for(h);
    std::vector<DenseMatrix> evol(T);
    for (std::size_t t = 0; t < T; ++t) evol[t] = prop->unitary(times[t]);
    const DenseMatrix wm = to_matrix(w), vm = to_matrix(v);
    parallel_for(M, [&](std::size_t m) {
        const auto setting = sample_setting(e, seed, m);
        // Columns of the tensor product are U|k> for every initial bitstring k.
        DenseMatrix u = DenseMatrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
        for (unsigned q = 0; q < n; ++q) {
            for (Eigen::Index c = 0; c < u.cols(); ++c) {
                kernels::apply_1q(std::span<Complex>(u.col(c).data(), d), q, setting.unitaries[q]);
            }
        }
        const DenseMatrix vu = vm * u;
        std::mt19937_64 rng(mix_seed(mix_seed(seed, m), 0x6f746f63));
        auto readout = [&](double exact) {
            if (options.shots == 0) return exact;
            const double p_plus = std::clamp(0.5 * (1 + exact), 0.0, 1.0);
            std::binomial_distribution<std::size_t> draw(options.shots, p_plus);
            const double plus = static_cast<double>(draw(rng));
            return 2 * plus / static_cast<double>(options.shots) - 1;
        };
        for (std::size_t t = 0; t < T; ++t) {
            const DenseMatrix phi1 = evol[t] * u, phi2 = evol[t] * vu;
            const DenseMatrix wphi1 = wm * phi1, wphi2 = wm * phi2;
            std::vector<double> a(d), b(d), a2;
            if (options.shots > 0) a2.resize(d);
            for (std::size_t k = 0; k < d; ++k) {
                const auto kk = static_cast<Eigen::Index>(k);
                const double e1 = phi1.col(kk).dot(wphi1.col(kk)).real();
                const double e2 = phi2.col(kk).dot(wphi2.col(kk)).real();
                a[k] = readout(e1);
                b[k] = readout(e2);
                if (options.shots > 0) a2[k] = readout(e1);
            }
            run.w1[t][m] = std::move(a);
            run.w2[t][m] = std::move(b);
            if (options.shots > 0) run.w1_repeat[t][m] = std::move(a2);
        }
    });
    return run;
}

namespace {

/// F x with F = (x)_q [[1, -1/2], [-1/2, 1]], the (-2)^{-D} kernel.
std::vector<double> hamming_kernel_apply(std::vector<double> x, unsigned n) {
    const std::size_t d = x.size();
    for (unsigned q = 0; q < n; ++q) {
        const std::size_t h = std::size_t{1} << q;
        for (std::size_t i = 0; i < d; ++i) {
            if (i & h) continue;
            const double u = x[i], v = x[i | h];
            x[i] = u - 0.5 * v;
            x[i | h] = v - 0.5 * u;
        }
    }
    return x;
}

double dot(const std::vector<double> &a, const std::vector<double> &b) {
    std::vector<double> p(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) p[i] = a[i] * b[i];
    return pairwise_sum(p);
}

}  // namespace

std::vector<EstimateWithError> otoc_estimate(const OtocRun &run, OtocEstimator estimator) {
    const std::size_t M = run.settings;
    const unsigned n = run.hamiltonian.n_qubits();
    const std::uint64_t k0 = run.options.initial_bits;
    if (estimator == OtocEstimator::kFixedState && (k0 >> n) != 0) {
        fail(ErrorKind::kConfig, "otoc_estimate: initial bitstring has bits beyond N");
    }
    std::vector<EstimateWithError> out;
    for (std::size_t t = 0; t < run.times.size(); ++t) {
        std::vector<double> num(M), den(M);
        const auto &denominator_source = run.options.shots > 0 ? run.w1_repeat[t] : run.w1[t];
        parallel_for(M, [&](std::size_t m) {
            if (estimator == OtocEstimator::kHammingWeighted) {
                const auto fa = hamming_kernel_apply(run.w1[t][m], n);
                num[m] = dot(fa, run.w2[t][m]);
                den[m] = dot(fa, denominator_source[m]);
            } else {
                num[m] = run.w1[t][m][k0] * run.w2[t][m][k0];
                den[m] = run.w1[t][m][k0] * denominator_source[m][k0];
            }
        });
        auto jk = ratio_jackknife(num, den);
        auto e = from_jackknife(jk, M);
        e.method = estimator == OtocEstimator::kHammingWeighted ? "otoc_hamming_weighted" : "otoc_fixed_state";
        const double mean_den = pairwise_sum(den) / static_cast<double>(M);
        if (std::abs(mean_den) < 1e-12) {
            e.flagged = true;
            e.flag_reason = "vanishing normalization";
        }
        out.push_back(e);
    }
    return out;
}

json OtocRun::to_json() const {
    json settings_json = json::array();
    for (std::size_t m = 0; m < settings; ++m) {
        const auto s = sample_setting({ensemble, hamiltonian.n_qubits()}, seed, m);
        json us = json::array();
        for (const auto &u : s.unitaries) {
            json entry = json::array();
            for (const Complex &z : u) {
                entry.push_back(z.real());
                entry.push_back(z.imag());
            }
            us.push_back(entry);
        }
        settings_json.push_back({{"m", m}, {"seed", s.seed}, {"unitaries", us}});
    }
    json pairs = json::array();
    const std::uint64_t k0 = options.initial_bits;
    for (std::size_t t = 0; t < times.size(); ++t) {
        json per = json::array();
        for (std::size_t m = 0; m < settings; ++m) per.push_back({w1[t][m][k0], w2[t][m][k0]});
        pairs.push_back({{"t", times[t]}, {"pairs", per}});
    }
    return {{"hamiltonian", hamiltonian.fingerprint()},
            {"w", w.str()},
            {"v", v.str()},
            {"ensemble", std::string(ensemble_name(ensemble))},
            {"m", settings},
            {"seed", seed},
            {"shots", options.shots},
            {"initial_bits", k0},
            {"settings", settings_json},
            {"pairs_at_initial_bits", pairs}};
}

}  // namespace rmkit
