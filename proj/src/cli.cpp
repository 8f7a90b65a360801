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

#include "rmkit/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "rmkit/dataset.hpp"
#include "rmkit/hamlearn.hpp"
#include "rmkit/parallel.hpp"
#include "rmkit/protocols.hpp"
#include "rmkit/shadows.hpp"
#include "rmkit/version.hpp"

namespace rmkit {

using nlohmann::json;

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::kInvalidArgument:
        case ErrorKind::kConfig: return kExitConfig;
        case ErrorKind::kSizeCap: return kExitSizeCap;
        case ErrorKind::kIo:
        case ErrorKind::kMalformed:
        case ErrorKind::kVersion:
        case ErrorKind::kInvariant: return kExitData;
        case ErrorKind::kProtocol: return kExitProtocol;
        case ErrorKind::kNoData: return kExitNoData;
    }
    return kExitInternal;
}

// ---- configuration ------------------------------------------------------------

namespace {

template <class T>
T get_or(const json &j, const char *key, T fallback) {
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

std::vector<double> scalar_or_list(const json &j, const char *key, std::size_t count) {
    const json &v = j.at(key);
    if (v.is_array()) {
        auto out = v.get<std::vector<double>>();
        if (out.size() != count) {
            fail(ErrorKind::kConfig, std::string("hamiltonian: '") + key + "' needs " + std::to_string(count) + " entries");
        }
        return out;
    }
    return std::vector<double>(count, v.get<double>());
}

NoiseChannel parse_noise(const json &j) {
    const auto kind = j.at("kind").get<std::string>();
    NoiseChannel c;
    c.p = j.at("p").get<double>();
    if (kind == "depolarizing") {
        c.kind = NoiseChannel::Kind::kDepolarizing;
    } else if (kind == "bit_flip") {
        c.kind = NoiseChannel::Kind::kBitFlip;
    } else if (kind == "global_depolarizing") {
        c.kind = NoiseChannel::Kind::kGlobalDepolarizing;
    } else {
        fail(ErrorKind::kConfig, "noise: unknown kind '" + kind + "'");
    }
    if (c.p < 0 || c.p > 1) fail(ErrorKind::kConfig, "noise: p must lie in [0, 1]");
    return c;
}

State parse_base_state(const json &j) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "computational") {
        const auto bits = j.at("bits").get<std::string>();
        std::uint64_t v = 0;
        for (std::size_t q = 0; q < bits.size(); ++q) {
            if (bits[q] != '0' && bits[q] != '1') fail(ErrorKind::kConfig, "state: bits must be 0/1");
            if (bits[q] == '1') v |= std::uint64_t{1} << q;
        }
        if (bits.empty()) fail(ErrorKind::kConfig, "state: empty bit string");
        return computational_state(static_cast<unsigned>(bits.size()), v);
    }
    if (kind == "neel") return neel_state(j.at("n").get<unsigned>());
    if (kind == "ghz") return ghz_state(j.at("n").get<unsigned>());
    if (kind == "product") return product_state(j.at("bloch").get<std::vector<std::array<double, 2>>>());
    if (kind == "haar") return haar_random_state(j.at("n").get<unsigned>(), j.at("seed").get<std::uint64_t>());
    if (kind == "random_mixed") {
        return random_mixed_state(j.at("n").get<unsigned>(), j.at("seed").get<std::uint64_t>(), get_or(j, "rank", 0u));
    }
    if (kind == "maximally_mixed") return maximally_mixed_state(j.at("n").get<unsigned>());
    if (kind == "gibbs") return gibbs_state(parse_hamiltonian(j.at("hamiltonian")), j.at("beta").get<double>());
    if (kind == "werner") return werner_state(j.at("p").get<double>(), get_or(j, "pairs", 1u));
    if (kind == "eigenstate") return eigenstate(parse_hamiltonian(j.at("hamiltonian")), get_or(j, "index", 0u));
    if (kind == "dimer") return dimer_state(j.at("n").get<unsigned>(), get_or(j, "offset", 0u));
    fail(ErrorKind::kConfig, "state: unknown kind '" + kind + "'");
}

/// Wraps json type and key errors into configuration errors.
template <class F>
auto config_guard(const char *what, F f) -> decltype(f()) {
    try {
        return f();
    } catch (const json::exception &e) {
        fail(ErrorKind::kConfig, std::string(what) + ": " + e.what());
    }
}

PauliString parse_pauli_arg(const std::string &text, const char *what) {
    try {
        return PauliString::from_string(text);
    } catch (const Error &e) {
        fail(ErrorKind::kConfig, std::string(what) + ": " + e.what());
    }
}

}  // namespace

HamiltonianSpec parse_hamiltonian(const json &j) {
    return config_guard("hamiltonian", [&] {
        const auto kind = j.at("kind").get<std::string>();
        if (kind == "terms") {
            const unsigned n = j.at("n").get<unsigned>();
            std::vector<HamiltonianTerm> terms;
            for (const auto &t : j.at("terms")) {
                if (t.is_array()) {
                    terms.push_back({t.at(1).get<double>(), parse_pauli_arg(t.at(0).get<std::string>(), "hamiltonian")});
                } else {
                    terms.push_back({t.at("coeff").get<double>(), parse_pauli_arg(t.at("pauli").get<std::string>(), "hamiltonian")});
                }
                if (terms.back().pauli.n_qubits() != n) fail(ErrorKind::kConfig, "hamiltonian: term width differs from n");
            }
            return HamiltonianSpec(n, std::move(terms));
        }
        const unsigned n = j.at("n").get<unsigned>();
        if (n < 2) fail(ErrorKind::kConfig, "hamiltonian: chains need n >= 2");
        if (kind == "xy") return build_xy_hamiltonian(n, get_or(j, "J", 1.0), get_or(j, "alpha", 1.0));
        if (kind == "tfim") return build_tfim(scalar_or_list(j, "J", n - 1), scalar_or_list(j, "h", n));
        if (kind == "mixed_field_ising") {
            return build_mixed_field_ising(n, get_or(j, "J", 1.0), get_or(j, "hx", 0.0), get_or(j, "hz", 0.0));
        }
        fail(ErrorKind::kConfig, "hamiltonian: unknown kind '" + kind + "'");
    });
}

State parse_state(const json &j) {
    return config_guard("state", [&] {
        State s = parse_base_state(j);
        if (j.contains("evolve")) {
            const auto &e = j.at("evolve");
            const auto h = parse_hamiltonian(e.at("hamiltonian"));
            if (h.n_qubits() != n_qubits(s)) fail(ErrorKind::kConfig, "state: evolve Hamiltonian width differs");
            s = evolve(s, h, e.at("time").get<double>());
        }
        if (j.contains("noise")) s = apply_noise(s, parse_noise(j.at("noise")));
        return s;
    });
}

void apply_override(json &config, const std::string &assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) fail(ErrorKind::kConfig, "--set expects key=value, got '" + assignment + "'");
    const std::string key = assignment.substr(0, eq), text = assignment.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;
    json *node = &config;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) fail(ErrorKind::kConfig, "--set: empty key component in '" + key + "'");
        if (!node->is_object()) {
            if (!node->is_null()) fail(ErrorKind::kConfig, "--set: '" + key + "' descends into a non-object");
            *node = json::object();
        }
        node = &(*node)[part];
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    *node = value;
}

Qubits parse_qubits(const std::string &text) {
    Qubits out;
    std::stringstream ss(text);
    std::string item;
    auto number = [&](const std::string &s) -> unsigned {
        if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
            fail(ErrorKind::kConfig, "qubit list: bad entry '" + s + "' in '" + text + "'");
        }
        return static_cast<unsigned>(std::stoul(s));
    };
    while (std::getline(ss, item, ',')) {
        const auto dash = item.find('-');
        if (dash == std::string::npos) {
            out.push_back(number(item));
        } else {
            const unsigned lo = number(item.substr(0, dash)), hi = number(item.substr(dash + 1));
            if (hi < lo) fail(ErrorKind::kConfig, "qubit list: descending range in '" + text + "'");
            for (unsigned q = lo; q <= hi; ++q) out.push_back(q);
        }
    }
    if (out.empty()) fail(ErrorKind::kConfig, "qubit list: empty");
    return out;
}

// ---- commands -------------------------------------------------------------------

namespace {

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json estimate_json(const EstimateWithError &e) {
    json j = {{"value", number(e.value)},
              {"std_error", number(e.std_error)},
              {"n_samples", e.n_samples},
              {"method", e.method},
              {"flagged", e.flagged}};
    if (e.flagged) j["flag_reason"] = e.flag_reason;
    return j;
}

json record(const std::string &command) {
    return {{"schema", std::string(kResultSchema)},
            {"tool", std::string(kToolName)},
            {"version", std::string(kToolVersion)},
            {"command", command}};
}

void emit(std::ostream &out, const json &j) { out << j.dump() << '\n'; }

std::string fmt(double v) {
    std::ostringstream s;
    s << std::setprecision(6) << v;
    return s.str();
}

std::string summary(const EstimateWithError &e) {
    return fmt(e.value) + " +- " + fmt(e.std_error) + " [" + e.method + (e.flagged ? ", flagged: " + e.flag_reason : "") +
           "]";
}

json load_json_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::kIo, "cannot open '" + path + "'");
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) fail(ErrorKind::kConfig, "'" + path + "' is not valid JSON");
    return j;
}

void write_text(const std::string &path, const std::string &text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::kIo, "cannot write '" + path + "'");
    out << text;
    if (!out) fail(ErrorKind::kIo, "write to '" + path + "' failed");
}

/// Minimal CSV writer for sweep tables.
struct Csv {
    std::ostringstream text;
    explicit Csv(const std::string &header) { text << header << '\n'; }
    void row(const std::vector<std::string> &cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) text << (i ? "," : "") << cells[i];
        text << '\n';
    }
};

std::string csv_number(double v) {
    if (!std::isfinite(v)) return "nan";
    std::ostringstream s;
    s << std::setprecision(17) << v;
    return s.str();
}

std::string qubit_label(const Qubits &q) {
    std::string s;
    for (std::size_t i = 0; i < q.size(); ++i) s += (i ? " " : "") + std::to_string(q[i]);
    return s;
}

Qubits prefix(unsigned size) { return all_qubits(size); }

/// Shared options: config file, --set overrides, thread count.
struct ConfigOptions {
    std::string config_path;
    std::vector<std::string> sets;

    void add(CLI::App *app) {
        app->add_option("--config", config_path, "JSON configuration document");
        app->add_option("--set", sets, "override a config key: dotted.key=value (repeatable)");
    }
    json load() const {
        json cfg = config_path.empty() ? json::object() : load_json_file(config_path);
        if (!cfg.is_object()) fail(ErrorKind::kConfig, "configuration must be a JSON object");
        for (const auto &s : sets) apply_override(cfg, s);
        return cfg;
    }
};

EnsembleKind ensemble_from(const json &cfg) {
    return parse_ensemble(config_guard("ensemble", [&] { return get_or<std::string>(cfg, "ensemble", "clifford"); }));
}

// measure ---------------------------------------------------------------------------

int cmd_measure(const json &cfg, std::ostream &out, std::ostream &err) {
    const State state = config_guard("measure", [&] {
        if (!cfg.contains("state")) fail(ErrorKind::kConfig, "measure: config has no 'state'");
        return parse_state(cfg.at("state"));
    });
    const auto [M, K, seed, output] = config_guard("measure", [&] {
        for (const char *key : {"m", "k", "seed", "output"}) {
            if (!cfg.contains(key)) fail(ErrorKind::kConfig, std::string("measure: '") + key + "' is required");
        }
        const auto m = cfg.at("m").get<long long>(), k = cfg.at("k").get<long long>();
        if (m < 1 || k < 1) fail(ErrorKind::kConfig, "measure: m and k must be at least 1");
        return std::tuple{static_cast<std::size_t>(m), static_cast<std::size_t>(k), cfg.at("seed").get<std::uint64_t>(),
                          cfg.at("output").get<std::string>()};
    });
    const unsigned n = n_qubits(state);
    AcquireOptions opts;
    opts.state_description = cfg.at("state");
    config_guard("measure", [&] {
        if (cfg.contains("shot_seed")) opts.shot_seed = cfg.at("shot_seed").get<std::uint64_t>();
        if (cfg.contains("symmetric_window")) opts.symmetric_window = cfg.at("symmetric_window").get<Qubits>();
        return 0;
    });
    const auto ds = acquire(state, {ensemble_from(cfg), n}, M, K, seed, opts);
    write_dataset(ds, output);
    const auto digest = dataset_digest(ds);
    json r = record("measure");
    r["params"] = cfg;
    r["dataset_digest"] = digest;
    r["result"] = {{"n", n}, {"m", M}, {"k", K}, {"output", output}};
    emit(out, r);
    err << "measure: N=" << n << " M=" << M << " K=" << K << " digest=" << digest << " -> " << output << '\n';
    return kExitOk;
}

// estimate --------------------------------------------------------------------------

struct EstimateArgs {
    std::string dataset;
    std::string estimator;
    std::string pauli;
    std::string observable;
    std::string subsys, a, b, c, window;
    std::vector<unsigned> moments;
    double z = 3.0;
    std::string method = "hamming";
    std::string aggregation = "mean";
    std::size_t batches = 0;
    double delta = 0.0;
    std::string path = "auto";
    bool sweep = false;
    std::string csv;
};

PurityMethod purity_method(const std::string &m) {
    if (m == "hamming") return PurityMethod::kHamming;
    if (m == "shadow") return PurityMethod::kShadow;
    fail(ErrorKind::kConfig, "--method must be 'hamming' or 'shadow'");
}

AggregateOptions aggregate_options(const EstimateArgs &a) {
    AggregateOptions o;
    if (a.aggregation == "mean") return o;
    if (a.aggregation != "median_of_means") fail(ErrorKind::kConfig, "--aggregation must be 'mean' or 'median_of_means'");
    o.kind = Aggregation::kMedianOfMeans;
    if (a.batches > 0) {
        o.batches = a.batches;
    } else if (a.delta > 0 && a.delta < 1) {
        o.batches = median_of_means_batches(a.delta);
    } else {
        fail(ErrorKind::kConfig, "median_of_means needs --batches or --delta in (0, 1)");
    }
    return o;
}

DenseMatrix parse_observable(const std::string &text, unsigned n) {
    DenseMatrix o = DenseMatrix::Zero(static_cast<Eigen::Index>(std::size_t{1} << n), static_cast<Eigen::Index>(std::size_t{1} << n));
    std::stringstream ss(text);
    std::string item;
    bool any = false;
    while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        const std::string letters = item.substr(0, colon);
        double coeff = 1.0;
        if (colon != std::string::npos) {
            try {
                coeff = std::stod(item.substr(colon + 1));
            } catch (const std::exception &) {
                fail(ErrorKind::kConfig, "--observable: bad coefficient in '" + item + "'");
            }
        }
        const auto p = parse_pauli_arg(letters, "--observable");
        if (p.n_qubits() != n) fail(ErrorKind::kConfig, "--observable: term width differs from the dataset");
        o += coeff * to_matrix(p);
        any = true;
    }
    if (!any) fail(ErrorKind::kConfig, "--observable: no terms");
    if ((o - o.adjoint()).norm() > 1e-12) fail(ErrorKind::kConfig, "--observable: not Hermitian");
    return o;
}

Qubits required_qubits(const std::string &text, const char *flag) {
    if (text.empty()) fail(ErrorKind::kConfig, std::string("missing ") + flag);
    return parse_qubits(text);
}

int cmd_estimate(const EstimateArgs &args, std::ostream &out, std::ostream &err) {
    static const std::vector<std::string> known = {"pauli",  "observable", "purity-shadow", "purity-hamming", "renyi2",
                                                   "pt-moments", "p3-test", "reflection", "topo-entropy"};
    if (std::find(known.begin(), known.end(), args.estimator) == known.end()) {
        fail(ErrorKind::kConfig, "unknown estimator '" + args.estimator + "'");
    }
    auto ds = read_dataset(args.dataset);
    const auto digest = dataset_digest(ds);
    if (!args.subsys.empty()) ds = restrict_dataset(ds, parse_qubits(args.subsys));
    const unsigned n = ds.n_qubits();
    const auto all = all_qubits(n);
    json params = {{"dataset", args.dataset}, {"estimator", args.estimator}};
    if (!args.subsys.empty()) params["subsys"] = parse_qubits(args.subsys);
    json result;
    std::string line;
    std::optional<Csv> csv;

    auto purity_like = [&](const Qubits &q) -> EstimateWithError {
        if (args.estimator == "purity-shadow") return purity_shadow(ds, q);
        if (args.estimator == "purity-hamming") return purity_hamming(ds, q);
        return renyi2(ds, q, purity_method(args.method));
    };

    if (args.estimator == "pauli") {
        if (args.pauli.empty()) fail(ErrorKind::kConfig, "pauli estimator needs --pauli");
        const auto p = parse_pauli_arg(args.pauli, "--pauli");
        if (p.n_qubits() != n) fail(ErrorKind::kConfig, "--pauli: width differs from the dataset");
        PredictionPath path = PredictionPath::kAuto;
        if (args.path == "compatibility") path = PredictionPath::kCompatibility;
        else if (args.path == "snapshot") path = PredictionPath::kSnapshot;
        else if (args.path != "auto") fail(ErrorKind::kConfig, "--path must be auto, compatibility or snapshot");
        params["pauli"] = p.str();
        params["path"] = args.path;
        params["aggregation"] = args.aggregation;
        auto e = predict_pauli(ds, p, path, aggregate_options(args));
        result = estimate_json(e);
        if (ds.ensemble() == EnsembleKind::kClifford) result["compatible_settings"] = count_compatible(ds, p);
        line = p.str() + " = " + summary(e);
    } else if (args.estimator == "observable") {
        if (args.observable.empty()) fail(ErrorKind::kConfig, "observable estimator needs --observable");
        params["observable"] = args.observable;
        params["aggregation"] = args.aggregation;
        auto e = predict_observable(ds, parse_observable(args.observable, n), all, aggregate_options(args));
        result = estimate_json(e);
        line = "<O> = " + summary(e);
    } else if (args.estimator == "purity-shadow" || args.estimator == "purity-hamming" || args.estimator == "renyi2") {
        if (args.estimator == "renyi2") params["method"] = args.method;
        if (args.sweep) {
            params["sweep"] = "prefix";
            json points = json::array();
            csv.emplace("size,qubits,value,std_error,flagged");
            for (unsigned size = 1; size <= n; ++size) {
                const auto q = prefix(size);
                auto e = purity_like(q);
                json p = estimate_json(e);
                p["size"] = size;
                p["qubits"] = q;
                points.push_back(p);
                csv->row({std::to_string(size), qubit_label(q), csv_number(e.value), csv_number(e.std_error),
                          e.flagged ? "1" : "0"});
                err << args.estimator << " [" << qubit_label(q) << "] = " << summary(e) << '\n';
            }
            result = {{"points", points}};
        } else {
            auto e = purity_like(all);
            result = estimate_json(e);
            line = args.estimator + " = " + summary(e);
        }
    } else if (args.estimator == "pt-moments") {
        const auto a = required_qubits(args.a, "--a"), b = required_qubits(args.b, "--b");
        const auto moments = args.moments.empty() ? std::vector<unsigned>{2, 3} : args.moments;
        params["a"] = a;
        params["b"] = b;
        params["n"] = moments;
        json list = json::array();
        for (unsigned k : moments) {
            auto e = pt_moment(ds, a, b, k);
            json j = estimate_json(e);
            j["n"] = k;
            list.push_back(j);
            err << "p" << k << " = " << summary(e) << '\n';
        }
        result = {{"moments", list}};
    } else if (args.estimator == "p3-test") {
        const auto a = required_qubits(args.a, "--a"), b = required_qubits(args.b, "--b");
        params["a"] = a;
        params["b"] = b;
        params["z"] = args.z;
        auto r = p3_ppt_test(ds, a, b, args.z);
        result = {{"entangled", r.entangled}, {"p2", estimate_json(r.p2)},       {"p3", estimate_json(r.p3)},
                  {"difference", estimate_json(r.difference)}, {"margin", number(r.margin)}, {"z", r.z}};
        line = std::string("p3-test: ") + (r.entangled ? "entangled" : "inconclusive") + ", margin " + fmt(r.margin) +
               " sigma";
    } else if (args.estimator == "reflection") {
        const auto window = args.window.empty() ? all : parse_qubits(args.window);
        params["window"] = window;
        auto r = reflection_invariant(ds, window);
        result = {{"z_r", estimate_json(r.z_r)},
                  {"z_normalized", estimate_json(r.z_normalized)},
                  {"purity_left", estimate_json(r.purity_left)},
                  {"purity_right", estimate_json(r.purity_right)}};
        line = "Z_R = " + summary(r.z_r) + ", normalized " + summary(r.z_normalized);
    } else {
        const auto a = required_qubits(args.a, "--a"), b = required_qubits(args.b, "--b"),
                   c = required_qubits(args.c, "--c");
        params["a"] = a;
        params["b"] = b;
        params["c"] = c;
        params["method"] = args.method;
        auto e = topological_entropy(ds, a, b, c, purity_method(args.method));
        result = estimate_json(e);
        line = "S_topo = " + summary(e);
    }
    if (!args.csv.empty()) {
        if (!csv) fail(ErrorKind::kConfig, "--csv is available for --sweep runs");
        params["csv"] = args.csv;
        write_text(args.csv, csv->text.str());
    }
    json r = record("estimate");
    r["params"] = params;
    r["dataset_digest"] = digest;
    r["result"] = result;
    emit(out, r);
    if (!line.empty()) err << line << '\n';
    return kExitOk;
}

// oracle ----------------------------------------------------------------------------

struct OracleArgs {
    std::string quantity;
    std::string subsys, a, b, c, window, pauli, w, v;
    std::vector<double> times;
    unsigned moment = 3;
    bool sweep = false;
    std::string csv;
};

int cmd_oracle(const json &cfg, const OracleArgs &args, std::ostream &out, std::ostream &err) {
    json params = cfg;
    params["quantity"] = args.quantity;
    json result;
    std::optional<Csv> csv;
    if (args.quantity == "otoc") {
        const auto h = config_guard("oracle", [&] {
            if (!cfg.contains("hamiltonian")) fail(ErrorKind::kConfig, "oracle otoc: config has no 'hamiltonian'");
            return parse_hamiltonian(cfg.at("hamiltonian"));
        });
        const std::string wtext = !args.w.empty() ? args.w : config_guard("oracle", [&] { return get_or<std::string>(cfg, "w", ""); });
        const std::string vtext = !args.v.empty() ? args.v : config_guard("oracle", [&] { return get_or<std::string>(cfg, "v", ""); });
        auto times = !args.times.empty() ? args.times
                                         : config_guard("oracle", [&] { return get_or(cfg, "times", std::vector<double>{}); });
        if (wtext.empty() || vtext.empty() || times.empty()) fail(ErrorKind::kConfig, "oracle otoc needs w, v and times");
        const auto w = parse_pauli_arg(wtext, "w"), v = parse_pauli_arg(vtext, "v");
        params["w"] = w.str();
        params["v"] = v.str();
        params["times"] = times;
        json points = json::array();
        csv.emplace("t,otoc");
        for (double t : times) {
            const double value = oracle_otoc(h, w, v, t);
            points.push_back({{"t", t}, {"value", value}});
            csv->row({csv_number(t), csv_number(value)});
        }
        result = {{"points", points}};
    } else {
        const State s = config_guard("oracle", [&] {
            if (!cfg.contains("state")) fail(ErrorKind::kConfig, "oracle: config has no 'state'");
            return parse_state(cfg.at("state"));
        });
        const unsigned n = n_qubits(s);
        const Qubits sub = args.subsys.empty() ? all_qubits(n) : parse_qubits(args.subsys);
        for (unsigned q : sub)
            if (q >= n) fail(ErrorKind::kConfig, "oracle: qubit out of range");
        if (args.quantity == "pauli") {
            const auto p = parse_pauli_arg(args.pauli, "--pauli");
            if (p.n_qubits() != n) fail(ErrorKind::kConfig, "--pauli: width differs from the state");
            params["pauli"] = p.str();
            result = {{"value", oracle_expectation(s, p)}};
        } else if (args.quantity == "purity" || args.quantity == "renyi2") {
            auto value = [&](const Qubits &q) { return args.quantity == "purity" ? oracle_purity(s, q) : oracle_renyi2(s, q); };
            if (args.sweep) {
                json points = json::array();
                csv.emplace("size,qubits,value");
                for (unsigned size = 1; size <= sub.size(); ++size) {
                    const Qubits q(sub.begin(), sub.begin() + size);
                    const double v = value(q);
                    points.push_back({{"size", size}, {"qubits", q}, {"value", v}});
                    csv->row({std::to_string(size), qubit_label(q), csv_number(v)});
                }
                result = {{"points", points}};
            } else {
                params["subsys"] = sub;
                result = {{"value", value(sub)}};
            }
        } else if (args.quantity == "pt-moment") {
            const auto a = required_qubits(args.a, "--a"), b = required_qubits(args.b, "--b");
            params["a"] = a;
            params["b"] = b;
            params["n"] = args.moment;
            result = {{"value", oracle_pt_moment(s, a, b, args.moment)}};
        } else if (args.quantity == "reflection") {
            const auto window = args.window.empty() ? all_qubits(n) : parse_qubits(args.window);
            params["window"] = window;
            result = {{"z_r", oracle_reflection(s, window)}, {"z_normalized", oracle_reflection_normalized(s, window)}};
        } else if (args.quantity == "topo-entropy") {
            const auto a = required_qubits(args.a, "--a"), b = required_qubits(args.b, "--b"),
                       c = required_qubits(args.c, "--c");
            params["a"] = a;
            params["b"] = b;
            params["c"] = c;
            result = {{"value", oracle_topological_entropy(s, a, b, c)}};
        } else if (args.quantity == "overlap") {
            const State other = config_guard("oracle", [&] {
                if (!cfg.contains("other_state")) fail(ErrorKind::kConfig, "oracle overlap: config has no 'other_state'");
                return parse_state(cfg.at("other_state"));
            });
            params["subsys"] = sub;
            result = {{"value", oracle_overlap(s, other, sub)}};
        } else {
            fail(ErrorKind::kConfig, "unknown oracle quantity '" + args.quantity + "'");
        }
    }
    if (!args.csv.empty()) {
        if (!csv) fail(ErrorKind::kConfig, "--csv is available for sweeps and OTOC curves");
        params["csv"] = args.csv;
        write_text(args.csv, csv->text.str());
    }
    json r = record("oracle");
    r["params"] = params;
    r["result"] = result;
    emit(out, r);
    if (result.contains("value")) err << "oracle " << args.quantity << " = " << fmt(result["value"].get<double>()) << '\n';
    return kExitOk;
}

// compare ---------------------------------------------------------------------------

int cmd_compare(const std::string &p1, const std::string &p2, const std::string &subsys, const std::string &method,
                std::ostream &out, std::ostream &err) {
    const auto a = read_dataset(p1), b = read_dataset(p2);
    const Qubits q = subsys.empty() ? all_qubits(a.n_qubits()) : parse_qubits(subsys);
    json result;
    EstimateWithError f;
    if (method == "hamming") {
        auto r = fmax(a, b, q);
        f = r.fmax;
        result = {{"fmax", estimate_json(r.fmax)},
                  {"overlap", estimate_json(r.overlap)},
                  {"purity_a", estimate_json(r.purity_a)},
                  {"purity_b", estimate_json(r.purity_b)}};
    } else if (method == "shadow") {
        check_same_protocol(a, b);
        auto o = cross_overlap_shadow(a, b, q);
        auto pa = purity_shadow(a, q), pb = purity_shadow(b, q);
        const auto &den = pa.value >= pb.value ? pa : pb;
        f.value = den.value > 0 ? o.value / den.value : std::nan("");
        // First-order propagation; the three inputs are treated as independent.
        f.std_error = std::abs(f.value) * std::sqrt(std::pow(o.std_error / o.value, 2) + std::pow(den.std_error / den.value, 2));
        f.n_samples = o.n_samples;
        f.method = "shadow_ratio";
        if (!std::isfinite(f.value)) {
            f.flagged = true;
            f.flag_reason = "nonpositive purity in the denominator";
        }
        result = {{"fmax", estimate_json(f)},
                  {"overlap", estimate_json(o)},
                  {"purity_a", estimate_json(pa)},
                  {"purity_b", estimate_json(pb)}};
    } else {
        fail(ErrorKind::kConfig, "--method must be 'hamming' or 'shadow'");
    }
    json r = record("compare");
    r["params"] = {{"dataset_a", p1}, {"dataset_b", p2}, {"subsys", q}, {"method", method}};
    r["dataset_digest"] = {dataset_digest(a), dataset_digest(b)};
    r["result"] = result;
    emit(out, r);
    err << "F_max = " << summary(f) << '\n';
    return kExitOk;
}

// dfe -------------------------------------------------------------------------------

int cmd_dfe(const std::string &dataset, const json &cfg, const std::string &plan_path, const std::string &plan_out,
            std::ostream &out, std::ostream &err) {
    DfePlan plan;
    json params = {{"dataset", dataset}};
    if (!plan_path.empty()) {
        plan = DfePlan::from_json(load_json_file(plan_path));
        params["plan"] = plan_path;
    } else {
        const State target = config_guard("dfe", [&] {
            if (!cfg.contains("target")) fail(ErrorKind::kConfig, "dfe: config has no 'target' state");
            return parse_state(cfg.at("target"));
        });
        const auto *pure = std::get_if<PureState>(&target);
        if (!pure) fail(ErrorKind::kConfig, "dfe: the target must be a pure state");
        const auto [samples, seed, label] = config_guard("dfe", [&] {
            if (!cfg.contains("samples") || !cfg.contains("seed")) fail(ErrorKind::kConfig, "dfe: 'samples' and 'seed' are required");
            return std::tuple{cfg.at("samples").get<std::size_t>(), cfg.at("seed").get<std::uint64_t>(),
                              cfg.at("target").value("kind", std::string("target"))};
        });
        plan = dfe_plan(*pure, samples, seed, label);
        params["config"] = cfg;
    }
    if (!plan_out.empty()) {
        write_text(plan_out, plan.to_json().dump(2) + "\n");
        params["plan_out"] = plan_out;
    }
    const auto ds = read_dataset(dataset);
    auto r = dfe_estimate(plan, ds);
    json rec = record("dfe");
    rec["params"] = params;
    rec["dataset_digest"] = dataset_digest(ds);
    rec["plan"] = {{"target", plan.target_label}, {"samples", plan.samples}, {"seed", plan.seed},
                   {"distinct_paulis", plan.paulis.size()}, {"digest", sha256_hex(plan.to_json().dump())}};
    rec["result"] = {{"fidelity", estimate_json(r.fidelity)},
                     {"effective_samples", r.effective_samples},
                     {"skipped", r.skipped},
                     {"skipped_paulis", r.skipped_paulis}};
    emit(out, rec);
    err << "F = " << summary(r.fidelity) << " (" << r.effective_samples << " of " << plan.samples << " draws used)\n";
    return kExitOk;
}

// otoc ------------------------------------------------------------------------------

int cmd_otoc(const json &cfg, const std::string &csv_path, const std::string &run_out, bool with_oracle,
             std::ostream &out, std::ostream &err) {
    struct Parsed {
        HamiltonianSpec h;
        PauliString w, v;
        std::vector<double> times;
        std::size_t m;
        std::uint64_t seed;
        OtocOptions options;
        OtocEstimator estimator;
    };
    const Parsed p = config_guard("otoc", [&] {
        for (const char *key : {"hamiltonian", "w", "v", "times", "m", "seed"}) {
            if (!cfg.contains(key)) fail(ErrorKind::kConfig, std::string("otoc: '") + key + "' is required");
        }
        Parsed q;
        q.h = parse_hamiltonian(cfg.at("hamiltonian"));
        q.w = parse_pauli_arg(cfg.at("w").get<std::string>(), "w");
        q.v = parse_pauli_arg(cfg.at("v").get<std::string>(), "v");
        q.times = cfg.at("times").get<std::vector<double>>();
        q.m = cfg.at("m").get<std::size_t>();
        q.seed = cfg.at("seed").get<std::uint64_t>();
        q.options.shots = get_or<std::size_t>(cfg, "shots", 0);
        const auto bits = get_or<std::string>(cfg, "initial_bits", "");
        for (std::size_t i = 0; i < bits.size(); ++i) {
            if (bits[i] == '1') q.options.initial_bits |= std::uint64_t{1} << i;
            else if (bits[i] != '0') fail(ErrorKind::kConfig, "otoc: initial_bits must be 0/1");
        }
        const auto est = get_or<std::string>(cfg, "estimator", "hamming");
        if (est == "hamming") q.estimator = OtocEstimator::kHammingWeighted;
        else if (est == "fixed") q.estimator = OtocEstimator::kFixedState;
        else fail(ErrorKind::kConfig, "otoc: estimator must be 'hamming' or 'fixed'");
        return q;
    });
    const auto run = otoc_run(p.h, p.w, p.v, p.times, {ensemble_from(cfg), p.h.n_qubits()}, p.m, p.seed, p.options);
    const auto est = otoc_estimate(run, p.estimator);
    json points = json::array();
    Csv csv(with_oracle ? "t,value,std_error,oracle" : "t,value,std_error");
    for (std::size_t t = 0; t < p.times.size(); ++t) {
        json point = estimate_json(est[t]);
        point["t"] = p.times[t];
        std::vector<std::string> row = {csv_number(p.times[t]), csv_number(est[t].value), csv_number(est[t].std_error)};
        if (with_oracle) {
            const double o = oracle_otoc(p.h, p.w, p.v, p.times[t]);
            point["oracle"] = o;
            row.push_back(csv_number(o));
        }
        points.push_back(point);
        csv.row(row);
        err << "t=" << fmt(p.times[t]) << " O=" << summary(est[t]) << '\n';
    }
    json params = cfg;
    if (!csv_path.empty()) {
        write_text(csv_path, csv.text.str());
        params["csv"] = csv_path;
    }
    const std::string provenance = run.to_json().dump();
    if (!run_out.empty()) {
        write_text(run_out, provenance + "\n");
        params["run_output"] = run_out;
    }
    json r = record("otoc");
    r["params"] = params;
    r["run_digest"] = sha256_hex(provenance);
    r["result"] = {{"points", points}};
    emit(out, r);
    return kExitOk;
}

// hamlearn --------------------------------------------------------------------------

std::vector<PauliString> parse_pauli_list(const std::string &text, const char *what) {
    std::vector<PauliString> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_pauli_arg(item, what));
    if (out.empty()) fail(ErrorKind::kConfig, std::string(what) + ": empty list");
    return out;
}

int cmd_hamlearn(const std::string &dataset, const std::string &ansatz, unsigned k, unsigned range,
                 const std::string &terms, const std::string &constraints, double gap_threshold, std::ostream &out,
                 std::ostream &err) {
    const auto ds = read_dataset(dataset);
    const unsigned n = ds.n_qubits();
    AnsatzBasis basis;
    json params = {{"dataset", dataset}, {"ansatz", ansatz}, {"gap_threshold", gap_threshold}};
    if (ansatz == "chain") {
        basis = AnsatzBasis::chain(n, k, range);
        params["k"] = k;
        params["r"] = range;
    } else if (ansatz == "terms") {
        basis = AnsatzBasis::from_terms(parse_pauli_list(terms, "--terms"));
        params["terms"] = basis.labels();
    } else {
        fail(ErrorKind::kConfig, "--ansatz must be 'chain' or 'terms'");
    }
    if (basis.n_qubits() != n) fail(ErrorKind::kConfig, "hamlearn: ansatz width differs from the dataset");
    std::optional<std::vector<PauliString>> cons;
    params["constraints"] = constraints;
    if (constraints.rfind("chain:", 0) == 0) {
        unsigned ck = 0, cr = 0;
        char sep = 0;
        std::istringstream s(constraints.substr(6));
        if (!(s >> ck >> sep >> cr) || sep != ':') fail(ErrorKind::kConfig, "--constraints: expected chain:k:r");
        cons = AnsatzBasis::chain(n, ck, cr).terms;
    } else if (constraints != "ansatz") {
        cons = parse_pauli_list(constraints, "--constraints");
    }
    auto r = learn_from_dataset(ds, basis, gap_threshold, cons ? &*cons : nullptr);
    json couplings = json::array();
    for (std::size_t i = 0; i < basis.size(); ++i) {
        couplings.push_back({{"term", basis.terms[i].letters()}, {"c", r.c(static_cast<Eigen::Index>(i))}});
    }
    json sv = json::array();
    for (double s : r.singular_values) sv.push_back(s);
    json rec = record("hamlearn");
    rec["params"] = params;
    rec["dataset_digest"] = dataset_digest(ds);
    rec["result"] = {{"couplings", couplings}, {"gap", number(r.gap)},      {"noise_floor", r.noise_floor},
                     {"flagged", r.flagged},   {"flag_reason", r.flag_reason}, {"singular_values", sv},
                     {"missing", r.missing}};
    emit(out, rec);
    err << "hamlearn: " << basis.size() << " terms, gap " << fmt(r.gap) << (r.flagged ? ", flagged: " + r.flag_reason : "")
        << '\n';
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    CLI::App app{"Randomized-measurement toolkit", std::string(kToolName)};
    app.set_version_flag("--version", std::string(kToolName) + " " + std::string(kToolVersion));
    app.require_subcommand(1);
    unsigned threads = 0;
    app.add_option("--threads", threads, "worker threads (results do not depend on it)");

    // measure
    auto *measure = app.add_subcommand("measure", "acquire a randomized-measurement dataset");
    ConfigOptions measure_cfg;
    measure_cfg.add(measure);
    std::optional<long long> m_opt, k_opt;
    std::optional<std::uint64_t> seed_opt, shot_seed_opt;
    std::string ensemble_opt, output_opt;
    measure->add_option("--m", m_opt, "number of settings M");
    measure->add_option("--k", k_opt, "shots per setting K");
    measure->add_option("--seed", seed_opt, "master seed");
    measure->add_option("--shot-seed", shot_seed_opt, "seed of the outcome stream");
    measure->add_option("--ensemble", ensemble_opt, "haar or clifford");
    measure->add_option("-o,--output", output_opt, "dataset path");
    measure->add_option("--threads", threads, "worker threads");

    // estimate
    auto *estimate = app.add_subcommand("estimate", "run an estimator on a dataset");
    EstimateArgs ea;
    estimate->add_option("dataset", ea.dataset, "dataset path")->required();
    estimate->add_option("-e,--estimator", ea.estimator,
                         "pauli, observable, purity-shadow, purity-hamming, renyi2, pt-moments, p3-test, reflection, "
                         "topo-entropy")
        ->required();
    estimate->add_option("--pauli", ea.pauli, "Pauli string, e.g. XZIY");
    estimate->add_option("--observable", ea.observable, "sum of Pauli terms, e.g. XX:0.5,ZZ:0.5");
    estimate->add_option("--subsys", ea.subsys, "restrict the dataset first, e.g. 0,1,2 or 0-4");
    estimate->add_option("--a", ea.a, "subsystem A");
    estimate->add_option("--b", ea.b, "subsystem B");
    estimate->add_option("--c", ea.c, "subsystem C");
    estimate->add_option("--window", ea.window, "reflection window");
    estimate->add_option("--n", ea.moments, "partial-transpose moment orders");
    estimate->add_option("--z", ea.z, "p3 test threshold in standard errors");
    estimate->add_option("--method", ea.method, "hamming or shadow");
    estimate->add_option("--aggregation", ea.aggregation, "mean or median_of_means");
    estimate->add_option("--batches", ea.batches, "median-of-means batch count");
    estimate->add_option("--delta", ea.delta, "median-of-means confidence (sets the batch count)");
    estimate->add_option("--path", ea.path, "Pauli prediction path: auto, compatibility, snapshot");
    estimate->add_flag("--sweep", ea.sweep, "purity/entropy of every prefix subsystem");
    estimate->add_option("--csv", ea.csv, "write the sweep table");
    estimate->add_option("--threads", threads, "worker threads");

    // oracle
    auto *oracle = app.add_subcommand("oracle", "exact values from the dense simulator");
    ConfigOptions oracle_cfg;
    oracle_cfg.add(oracle);
    OracleArgs oa;
    oracle->add_option("-q,--quantity", oa.quantity,
                       "pauli, purity, renyi2, pt-moment, reflection, topo-entropy, overlap, otoc")
        ->required();
    oracle->add_option("--subsys", oa.subsys, "subsystem");
    oracle->add_option("--a", oa.a, "subsystem A");
    oracle->add_option("--b", oa.b, "subsystem B");
    oracle->add_option("--c", oa.c, "subsystem C");
    oracle->add_option("--window", oa.window, "reflection window");
    oracle->add_option("--pauli", oa.pauli, "Pauli string");
    oracle->add_option("--n", oa.moment, "partial-transpose moment order");
    oracle->add_option("--w", oa.w, "OTOC operator W");
    oracle->add_option("--v", oa.v, "OTOC operator V");
    oracle->add_option("--times", oa.times, "OTOC times");
    oracle->add_flag("--sweep", oa.sweep, "prefix sweep for purity and renyi2");
    oracle->add_option("--csv", oa.csv, "write the curve table");
    oracle->add_option("--threads", threads, "worker threads");

    // compare
    auto *compare = app.add_subcommand("compare", "cross-platform fidelity F_max of two datasets");
    std::string cmp_a, cmp_b, cmp_subsys, cmp_method = "hamming";
    compare->add_option("dataset_a", cmp_a, "first dataset")->required();
    compare->add_option("dataset_b", cmp_b, "second dataset")->required();
    compare->add_option("--subsys", cmp_subsys, "subsystem");
    compare->add_option("--method", cmp_method, "hamming or shadow");
    compare->add_option("--threads", threads, "worker threads");

    // dfe
    auto *dfe = app.add_subcommand("dfe", "direct fidelity estimation against a pure target");
    ConfigOptions dfe_cfg;
    dfe_cfg.add(dfe);
    std::string dfe_dataset, dfe_plan_path, dfe_plan_out;
    std::optional<std::size_t> dfe_samples;
    std::optional<std::uint64_t> dfe_seed;
    dfe->add_option("dataset", dfe_dataset, "dataset path")->required();
    dfe->add_option("--plan", dfe_plan_path, "use a saved sampling plan");
    dfe->add_option("--plan-out", dfe_plan_out, "write the sampling plan");
    dfe->add_option("--samples", dfe_samples, "number of importance-sampled Paulis L");
    dfe->add_option("--plan-seed", dfe_seed, "seed of the Pauli sampling");
    dfe->add_option("--threads", threads, "worker threads");

    // otoc
    auto *otoc = app.add_subcommand("otoc", "infinite-temperature OTOC from randomized initial states");
    ConfigOptions otoc_cfg;
    otoc_cfg.add(otoc);
    std::string otoc_csv, otoc_run_out;
    bool otoc_oracle = false;
    std::optional<std::size_t> otoc_m, otoc_shots;
    std::optional<std::uint64_t> otoc_seed;
    otoc->add_option("--m", otoc_m, "number of random initial states");
    otoc->add_option("--seed", otoc_seed, "master seed");
    otoc->add_option("--shots", otoc_shots, "readouts per expectation (0 = exact expectations)");
    otoc->add_option("--csv", otoc_csv, "write the OTOC-vs-time table");
    otoc->add_option("--run-output", otoc_run_out, "write the run provenance (unitaries and pairs)");
    otoc->add_flag("--with-oracle", otoc_oracle, "include exact values");
    otoc->add_option("--threads", threads, "worker threads");

    // hamlearn
    auto *hamlearn = app.add_subcommand("hamlearn", "recover Hamiltonian couplings from a steady-state dataset");
    std::string hl_dataset, hl_ansatz = "chain", hl_terms, hl_constraints = "ansatz";
    unsigned hl_k = 2, hl_r = 1;
    double hl_gap = 10.0;
    hamlearn->add_option("dataset", hl_dataset, "dataset path")->required();
    hamlearn->add_option("--ansatz", hl_ansatz, "chain or terms");
    hamlearn->add_option("--k", hl_k, "chain ansatz locality");
    hamlearn->add_option("--r", hl_r, "chain ansatz range");
    hamlearn->add_option("--terms", hl_terms, "explicit ansatz terms, comma separated");
    hamlearn->add_option("--constraints", hl_constraints, "ansatz, chain:k:r, or a comma-separated Pauli list");
    hamlearn->add_option("--gap-threshold", hl_gap, "condition flag threshold");
    hamlearn->add_option("--threads", threads, "worker threads");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    const unsigned previous_threads = num_threads();
    if (threads > 0) set_num_threads(threads);
    struct Restore {
        unsigned t;
        ~Restore() { set_num_threads(t); }
    } restore{previous_threads};

    try {
        if (*measure) {
            json cfg = measure_cfg.load();
            if (m_opt) cfg["m"] = *m_opt;
            if (k_opt) cfg["k"] = *k_opt;
            if (seed_opt) cfg["seed"] = *seed_opt;
            if (shot_seed_opt) cfg["shot_seed"] = *shot_seed_opt;
            if (!ensemble_opt.empty()) cfg["ensemble"] = ensemble_opt;
            if (!output_opt.empty()) cfg["output"] = output_opt;
            return cmd_measure(cfg, out, err);
        }
        if (*estimate) return cmd_estimate(ea, out, err);
        if (*oracle) return cmd_oracle(oracle_cfg.load(), oa, out, err);
        if (*compare) return cmd_compare(cmp_a, cmp_b, cmp_subsys, cmp_method, out, err);
        if (*dfe) {
            json cfg = dfe_cfg.load();
            if (dfe_samples) cfg["samples"] = *dfe_samples;
            if (dfe_seed) cfg["seed"] = *dfe_seed;
            return cmd_dfe(dfe_dataset, cfg, dfe_plan_path, dfe_plan_out, out, err);
        }
        if (*otoc) {
            json cfg = otoc_cfg.load();
            if (otoc_m) cfg["m"] = *otoc_m;
            if (otoc_seed) cfg["seed"] = *otoc_seed;
            if (otoc_shots) cfg["shots"] = *otoc_shots;
            return cmd_otoc(cfg, otoc_csv, otoc_run_out, otoc_oracle, out, err);
        }
        if (*hamlearn) return cmd_hamlearn(hl_dataset, hl_ansatz, hl_k, hl_r, hl_terms, hl_constraints, hl_gap, out, err);
    } catch (const Error &e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e.kind());
    } catch (const std::exception &e) {
        err << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
    return kExitConfig;
}

}  // namespace rmkit
