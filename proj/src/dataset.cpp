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

#include "rmkit/dataset.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "rmkit/error.hpp"
#include "rmkit/parallel.hpp"
#include "rmkit/version.hpp"

namespace rmkit {

using nlohmann::json;

namespace {

constexpr std::uint64_t kShotStream = 0x73686f7473ULL;

[[noreturn]] void malformed(const std::string &msg) { fail(ErrorKind::kMalformed, "dataset: " + msg); }
[[noreturn]] void invariant(const std::string &msg) { fail(ErrorKind::kInvariant, "dataset: " + msg); }

json qubits_json(const Qubits &q) { return json(q); }

json header_json(const DatasetHeader &h) {
    json j = json::object();
    j["schema"] = kDatasetSchema;
    j["tool"] = h.tool;
    j["n"] = h.n_qubits;
    j["m"] = h.m;
    j["k"] = h.k;
    j["ensemble"] = std::string(ensemble_name(h.ensemble));
    j["seed"] = h.seed;
    j["shot_seed"] = h.shot_seed;
    if (!h.state.is_null()) j["state"] = h.state;
    if (h.window) j["window"] = qubits_json(*h.window);
    if (h.qubits) j["qubits"] = qubits_json(*h.qubits);
    return j;
}

json setting_json(const LocalUnitarySetting &s) {
    json arr = json::array();
    for (unsigned q = 0; q < s.n_qubits(); ++q) {
        if (s.kind == EnsembleKind::kClifford) {
            const auto &el = clifford_table()[s.clifford_ids[q]];
            arr.push_back(json::array({std::string(1, to_char(el.measured)), el.negative ? "-" : "+", s.clifford_ids[q]}));
        } else {
            json entry = json::array();
            for (const Complex &z : s.unitaries[q]) {
                entry.push_back(z.real());
                entry.push_back(z.imag());
            }
            arr.push_back(std::move(entry));
        }
    }
    return arr;
}

json record_json(const MeasurementRecord &r, unsigned n) {
    json j = json::object();
    j["m"] = r.setting.index;
    j["seed"] = r.setting.seed;
    j["setting"] = setting_json(r.setting);
    json shots = json::array();
    for (auto s : r.shots) shots.push_back(shot_to_hex(s, n));
    j["shots"] = std::move(shots);
    return j;
}

template <typename T>
T get_field(const json &j, const char *key, const char *what) {
    auto it = j.find(key);
    if (it == j.end()) malformed(std::string(what) + " is missing field '" + key + "'");
    try {
        return it->get<T>();
    } catch (const json::exception &) {
        malformed(std::string(what) + " field '" + key + "' has the wrong type");
    }
}

std::uint64_t get_uint(const json &j, const char *key, const char *what) {
    auto it = j.find(key);
    if (it == j.end()) malformed(std::string(what) + " is missing field '" + key + "'");
    if (!it->is_number_unsigned()) malformed(std::string(what) + " field '" + key + "' must be a nonnegative integer");
    return it->get<std::uint64_t>();
}

std::optional<Qubits> optional_qubits(const json &j, const char *key) {
    auto it = j.find(key);
    if (it == j.end()) return std::nullopt;
    if (!it->is_array()) malformed(std::string("header field '") + key + "' must be an array");
    Qubits q;
    for (const auto &v : *it) {
        if (!v.is_number_unsigned()) malformed(std::string("header field '") + key + "' must hold qubit indices");
        q.push_back(v.get<unsigned>());
    }
    return q;
}

DatasetHeader parse_header(const std::string &line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception &e) {
        malformed(std::string("header is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) malformed("header must be a JSON object");
    auto schema = j.find("schema");
    if (schema == j.end() || !schema->is_string()) malformed("header has no schema field");
    if (schema->get<std::string>() != kDatasetSchema) {
        fail(ErrorKind::kVersion, "dataset: unsupported schema '" + schema->get<std::string>() + "' (expected " +
                                      kDatasetSchema + ")");
    }
    DatasetHeader h;
    h.tool = j.value("tool", std::string());
    h.n_qubits = static_cast<unsigned>(get_uint(j, "n", "header"));
    h.m = get_uint(j, "m", "header");
    h.k = get_uint(j, "k", "header");
    try {
        h.ensemble = parse_ensemble(get_field<std::string>(j, "ensemble", "header"));
    } catch (const Error &) {
        malformed("header has an unknown ensemble");
    }
    h.seed = get_uint(j, "seed", "header");
    h.shot_seed = j.contains("shot_seed") ? get_uint(j, "shot_seed", "header") : h.seed;
    if (j.contains("state")) h.state = j["state"];
    h.window = optional_qubits(j, "window");
    h.qubits = optional_qubits(j, "qubits");
    if (h.n_qubits == 0 || h.n_qubits > kMaxQubits) invariant("n must lie in [1, 64]");
    if (h.k == 0) invariant("k must be at least 1");
    return h;
}

LocalUnitarySetting parse_setting(const json &arr, const DatasetHeader &h, std::size_t index, std::uint64_t seed) {
    if (!arr.is_array()) malformed("record setting must be an array");
    if (arr.size() != h.n_qubits) invariant("record " + std::to_string(index) + " has a setting of the wrong width");
    if (h.ensemble == EnsembleKind::kClifford) {
        std::vector<std::uint8_t> ids;
        std::vector<std::pair<char, bool>> declared;
        for (const auto &e : arr) {
            if (!e.is_array() || e.size() != 3 || !e[0].is_string() || !e[1].is_string() || !e[2].is_number_unsigned()) {
                malformed("Clifford setting entries must be [letter, sign, index]");
            }
            auto id = e[2].get<std::uint64_t>();
            if (id >= 24) invariant("Clifford table index out of range");
            auto letter = e[0].get<std::string>();
            auto sign = e[1].get<std::string>();
            if (letter.size() != 1 || (sign != "+" && sign != "-")) malformed("bad Clifford basis entry");
            ids.push_back(static_cast<std::uint8_t>(id));
            declared.emplace_back(letter[0], sign == "-");
        }
        auto s = clifford_setting(index, seed, ids);
        for (unsigned q = 0; q < h.n_qubits; ++q) {
            if (to_char(s.basis->letter(q)) != declared[q].first ||
                (((s.basis->negative_mask() >> q) & 1u) != 0) != declared[q].second) {
                invariant("record " + std::to_string(index) + ": basis entry disagrees with Clifford table index");
            }
        }
        return s;
    }
    LocalUnitarySetting s;
    s.index = index;
    s.kind = EnsembleKind::kHaar;
    s.seed = seed;
    for (const auto &e : arr) {
        if (!e.is_array() || e.size() != 8) malformed("Haar setting entries must hold 8 numbers");
        Mat2 u;
        for (int i = 0; i < 4; ++i) {
            if (!e[2 * i].is_number() || !e[2 * i + 1].is_number()) malformed("Haar setting entries must be numbers");
            u[i] = Complex(e[2 * i].get<double>(), e[2 * i + 1].get<double>());
        }
        if (!is_unitary(u, 1e-9)) invariant("record " + std::to_string(index) + " holds a non-unitary matrix");
        s.unitaries.push_back(u);
    }
    return s;
}

MeasurementRecord parse_record(const std::string &line, const DatasetHeader &h) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception &e) {
        malformed(std::string("record is not valid JSON (truncated file?): ") + e.what());
    }
    if (!j.is_object()) malformed("record must be a JSON object");
    const std::size_t index = get_uint(j, "m", "record");
    const std::uint64_t seed = j.contains("seed") ? get_uint(j, "seed", "record") : 0;
    auto it = j.find("setting");
    if (it == j.end()) malformed("record is missing field 'setting'");
    MeasurementRecord r;
    r.setting = parse_setting(*it, h, index, seed);
    auto shots = j.find("shots");
    if (shots == j.end() || !shots->is_array()) malformed("record is missing the shots array");
    if (shots->size() != h.k) invariant("record " + std::to_string(index) + " has the wrong number of shots");
    r.shots.reserve(h.k);
    for (const auto &s : *shots) {
        if (!s.is_string()) malformed("shots must be hex strings");
        r.shots.push_back(shot_from_hex(s.get<std::string>(), h.n_qubits));
    }
    return r;
}

}  // namespace

MeasurementDataset::MeasurementDataset(DatasetHeader header, std::vector<MeasurementRecord> records)
    : header_(std::move(header)), records_(std::move(records)) {
    if (header_.m != records_.size()) {
        invariant("header declares " + std::to_string(header_.m) + " settings but " +
                  std::to_string(records_.size()) + " records are present");
    }
    if (header_.n_qubits == 0 || header_.n_qubits > kMaxQubits) invariant("n must lie in [1, 64]");
    if (header_.k == 0) invariant("k must be at least 1");
    const std::uint64_t mask = low_mask(header_.n_qubits);
    for (std::size_t i = 0; i < records_.size(); ++i) {
        const auto &r = records_[i];
        if (i > 0 && r.index() <= records_[i - 1].index()) invariant("setting indices must be unique and increasing");
        if (r.setting.n_qubits() != header_.n_qubits) invariant("record setting width differs from n");
        if (r.setting.kind != header_.ensemble) invariant("record ensemble differs from header");
        if (r.shots.size() != header_.k) invariant("record shot count differs from k");
        for (auto s : r.shots) {
            if (s & ~mask) invariant("outcome has bits beyond n");
        }
    }
}

MeasurementDataset acquire(const State &state, const EnsembleSpec &e, std::size_t M, std::size_t K,
                           std::uint64_t seed, const AcquireOptions &options) {
    const unsigned n = n_qubits(state);
    require(e.n_qubits == n, "acquire: ensemble width differs from the state");
    if (M == 0 || K == 0) fail(ErrorKind::kConfig, "acquire: M and K must be positive");
    DatasetHeader h;
    h.n_qubits = n;
    h.m = M;
    h.k = K;
    h.ensemble = e.kind;
    h.seed = seed;
    h.shot_seed = options.shot_seed.value_or(seed);
    h.tool = std::string(kToolName) + " " + kToolVersion;
    h.state = options.state_description;
    h.window = options.symmetric_window;
    std::vector<MeasurementRecord> records(M);
    parallel_for(M, [&](std::size_t m) {
        MeasurementRecord r;
        r.setting = options.symmetric_window ? symmetric_setting(e, *options.symmetric_window, seed, m)
                                             : sample_setting(e, seed, m);
        std::mt19937_64 rng(mix_seed(mix_seed(h.shot_seed, m), kShotStream));
        r.shots = born_sample(state, r.setting.unitaries, K, rng);
        records[m] = std::move(r);
    });
    return {std::move(h), std::move(records)};
}

std::string serialize_dataset(const MeasurementDataset &ds) {
    std::string out = header_json(ds.header()).dump();
    out += '\n';
    for (const auto &r : ds.records()) {
        out += record_json(r, ds.n_qubits()).dump();
        out += '\n';
    }
    return out;
}

void write_dataset(const MeasurementDataset &ds, std::ostream &out) {
    out << serialize_dataset(ds);
    if (!out) fail(ErrorKind::kIo, "dataset: write failed");
}

void write_dataset(const MeasurementDataset &ds, const std::string &path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) fail(ErrorKind::kIo, "dataset: cannot open '" + path + "' for writing");
    write_dataset(ds, f);
    f.close();
    if (!f) fail(ErrorKind::kIo, "dataset: cannot write '" + path + "'");
}

MeasurementDataset read_dataset(std::istream &in) {
    std::string line;
    if (!std::getline(in, line)) malformed("file is empty");
    DatasetHeader h = parse_header(line);
    std::vector<MeasurementRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        records.push_back(parse_record(line, h));
    }
    return {std::move(h), std::move(records)};
}

MeasurementDataset read_dataset(const std::string &path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) fail(ErrorKind::kIo, "dataset: cannot open '" + path + "'");
    return read_dataset(f);
}

MeasurementDataset parse_dataset(const std::string &text) {
    std::istringstream in(text);
    return read_dataset(in);
}

MeasurementDataset restrict_dataset(const MeasurementDataset &ds, const Qubits &qubits) {
    if (qubits.empty()) fail(ErrorKind::kInvalidArgument, "restrict: subsystem is empty");
    std::uint64_t seen = 0;
    for (unsigned q : qubits) {
        if (q >= ds.n_qubits()) fail(ErrorKind::kInvalidArgument, "restrict: qubit " + std::to_string(q) + " out of range");
        if ((seen >> q) & 1u) fail(ErrorKind::kInvalidArgument, "restrict: repeated qubit");
        seen |= std::uint64_t{1} << q;
    }
    DatasetHeader h = ds.header();
    h.n_qubits = static_cast<unsigned>(qubits.size());
    Qubits labels;
    for (unsigned q : qubits) labels.push_back(ds.header().qubits ? (*ds.header().qubits)[q] : q);
    h.qubits = labels;
    h.window.reset();
    if (const auto &w = ds.header().window) {
        // Keep the mirrored structure when the whole window survives; a partial
        // window with a complete pair cannot be described and is refused.
        auto position = [&](unsigned q) -> std::optional<unsigned> {
            for (std::size_t j = 0; j < qubits.size(); ++j)
                if (qubits[j] == q) return static_cast<unsigned>(j);
            return std::nullopt;
        };
        Qubits mapped;
        for (unsigned q : *w)
            if (auto p = position(q)) mapped.push_back(*p);
        if (mapped.size() == w->size()) {
            h.window = mapped;
        } else {
            for (std::size_t i = 0; i < w->size() / 2; ++i) {
                if (position((*w)[i]) && position((*w)[w->size() - 1 - i])) {
                    fail(ErrorKind::kProtocol, "restrict: keeps a mirrored pair but not the whole symmetric window");
                }
            }
        }
    }
    std::vector<MeasurementRecord> records(ds.num_settings());
    parallel_for(records.size(), [&](std::size_t i) {
        const auto &src = ds.records()[i];
        MeasurementRecord r;
        r.setting = src.setting.restricted(qubits);
        r.shots.reserve(src.shots.size());
        for (auto s : src.shots) {
            std::uint64_t out = 0;
            for (std::size_t j = 0; j < qubits.size(); ++j) out |= ((s >> qubits[j]) & 1u) << j;
            r.shots.push_back(out);
        }
        records[i] = std::move(r);
    });
    return {std::move(h), std::move(records)};
}

void require_independent_unitaries(const MeasurementDataset &ds, std::uint64_t mask, const char *what) {
    const auto &w = ds.header().window;
    if (!w) return;
    for (std::size_t i = 0; i < w->size() / 2; ++i) {
        const unsigned a = (*w)[i], b = (*w)[w->size() - 1 - i];
        if (((mask >> a) & 1u) && ((mask >> b) & 1u)) {
            fail(ErrorKind::kProtocol, std::string(what) + ": qubits " + std::to_string(a) + " and " +
                                           std::to_string(b) + " share their random unitary (symmetric window)");
        }
    }
}

std::vector<MeasurementDataset> split_dataset(const MeasurementDataset &ds, const std::vector<double> &fractions) {
    if (fractions.empty()) fail(ErrorKind::kInvalidArgument, "split: no fractions given");
    double total = 0;
    for (double f : fractions) {
        if (!(f > 0)) fail(ErrorKind::kInvalidArgument, "split: fractions must be positive");
        total += f;
    }
    if (std::abs(total - 1.0) > 1e-9) fail(ErrorKind::kInvalidArgument, "split: fractions must sum to 1");
    const std::size_t M = ds.num_settings();
    std::vector<MeasurementDataset> parts;
    double cumulative = 0;
    std::size_t begin = 0;
    for (std::size_t i = 0; i < fractions.size(); ++i) {
        cumulative += fractions[i];
        std::size_t end = i + 1 == fractions.size() ? M : static_cast<std::size_t>(std::llround(cumulative * M));
        end = std::min(std::max(end, begin), M);
        DatasetHeader h = ds.header();
        h.m = end - begin;
        std::vector<MeasurementRecord> records(ds.records().begin() + static_cast<std::ptrdiff_t>(begin),
                                               ds.records().begin() + static_cast<std::ptrdiff_t>(end));
        parts.emplace_back(std::move(h), std::move(records));
        begin = end;
    }
    return parts;
}

MeasurementDataset merge_datasets(const std::vector<MeasurementDataset> &parts) {
    if (parts.empty()) fail(ErrorKind::kInvalidArgument, "merge: nothing to merge");
    DatasetHeader h = parts.front().header();
    std::vector<MeasurementRecord> records;
    for (const auto &p : parts) {
        DatasetHeader other = p.header();
        other.m = h.m;
        if (!(other == h)) fail(ErrorKind::kProtocol, "merge: headers differ");
        records.insert(records.end(), p.records().begin(), p.records().end());
    }
    std::sort(records.begin(), records.end(),
              [](const MeasurementRecord &a, const MeasurementRecord &b) { return a.index() < b.index(); });
    h.m = records.size();
    return {std::move(h), std::move(records)};
}

std::string sha256_hex(const std::string &bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        fail(ErrorKind::kIo, "SHA-256 computation failed");
    }
    static const char *hex = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 15];
    }
    return out;
}

std::string dataset_digest(const MeasurementDataset &ds) { return sha256_hex(serialize_dataset(ds)); }

std::string shot_to_hex(std::uint64_t bits, unsigned n_qubits) {
    static const char *hex = "0123456789abcdef";
    const unsigned width = (n_qubits + 3) / 4;
    std::string out(width, '0');
    for (unsigned i = 0; i < width; ++i) out[width - 1 - i] = hex[(bits >> (4 * i)) & 15];
    return out;
}

std::uint64_t shot_from_hex(const std::string &text, unsigned n_qubits) {
    const unsigned width = (n_qubits + 3) / 4;
    if (text.size() != width) invariant("shot '" + text + "' does not have " + std::to_string(width) + " hex digits");
    std::uint64_t v = 0;
    for (char c : text) {
        unsigned d;
        if (c >= '0' && c <= '9') {
            d = static_cast<unsigned>(c - '0');
        } else if (c >= 'a' && c <= 'f') {
            d = static_cast<unsigned>(c - 'a' + 10);
        } else if (c >= 'A' && c <= 'F') {
            d = static_cast<unsigned>(c - 'A' + 10);
        } else {
            malformed("shot '" + text + "' is not hex");
        }
        v = (v << 4) | d;
    }
    if (v & ~low_mask(n_qubits)) invariant("shot '" + text + "' has bits beyond n");
    return v;
}

}  // namespace rmkit
