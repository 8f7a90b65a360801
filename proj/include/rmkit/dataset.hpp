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

// Randomized-measurement records and their on-disk form.
//
// File layout (rmds/1), one JSON object per line:
//   {"schema":"rmds/1","tool":"rmkit 0.1.0","n":N,"m":M,"k":K,"ensemble":"clifford",
//    "seed":S,"shot_seed":T,"state":{...}?,"window":[...]?,"qubits":[...]?}
//   {"m":0,"seed":..., "setting":[...], "shots":["0a3", ...]}
//   ...
// A Clifford qubit entry is ["X","+",table_index]; a Haar entry is the 2x2
// matrix as 8 reals, row-major, real/imag interleaved. Shots are fixed-width
// lowercase hex with bit q of the integer holding qubit q.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rmkit/ensemble.hpp"
#include "rmkit/state.hpp"

namespace rmkit {

struct DatasetHeader {
    unsigned n_qubits = 0;
    std::size_t m = 0;
    std::size_t k = 0;
    EnsembleKind ensemble = EnsembleKind::kClifford;
    std::uint64_t seed = 0;
    /// Seed of the Born-sampling stream; independent of the setting stream.
    std::uint64_t shot_seed = 0;
    std::string tool;
    /// Provenance only. Estimators never read it.
    nlohmann::json state;
    /// Mirror window used by symmetric acquisition.
    std::optional<Qubits> window;
    /// Original qubit labels after restriction.
    std::optional<Qubits> qubits;

    bool operator==(const DatasetHeader &) const = default;
};

struct MeasurementRecord {
    LocalUnitarySetting setting;
    /// K outcomes; bit q is qubit q.
    std::vector<std::uint64_t> shots;

    std::size_t index() const { return setting.index; }
    bool operator==(const MeasurementRecord &) const = default;
};

class MeasurementDataset {
  public:
    MeasurementDataset() = default;
    /// Throws kInvariant when the records disagree with the header.
    MeasurementDataset(DatasetHeader header, std::vector<MeasurementRecord> records);

    const DatasetHeader &header() const { return header_; }
    const std::vector<MeasurementRecord> &records() const { return records_; }
    unsigned n_qubits() const { return header_.n_qubits; }
    std::size_t num_settings() const { return records_.size(); }
    std::size_t shots_per_setting() const { return header_.k; }
    EnsembleKind ensemble() const { return header_.ensemble; }

    bool operator==(const MeasurementDataset &) const = default;

  private:
    DatasetHeader header_;
    std::vector<MeasurementRecord> records_;
};

struct AcquireOptions {
    /// Defaults to the setting seed.
    std::optional<std::uint64_t> shot_seed;
    /// Use mirrored settings on this window (see symmetric_setting).
    std::optional<Qubits> symmetric_window;
    nlohmann::json state_description;
};

/// For each m: draw setting m, rotate the state, take K Born samples.
/// Output depends only on the arguments, not on the thread count.
MeasurementDataset acquire(const State &state, const EnsembleSpec &e, std::size_t M, std::size_t K,
                           std::uint64_t seed, const AcquireOptions &options = {});

std::string serialize_dataset(const MeasurementDataset &ds);
void write_dataset(const MeasurementDataset &ds, std::ostream &out);
void write_dataset(const MeasurementDataset &ds, const std::string &path);

/// Errors: kMalformed for syntax or truncation, kVersion for an unknown
/// schema, kInvariant for structurally inconsistent content.
MeasurementDataset read_dataset(std::istream &in);
MeasurementDataset read_dataset(const std::string &path);
MeasurementDataset parse_dataset(const std::string &text);

/// Projects settings and outcomes onto `qubits` (in the given order).
/// Estimators that assume independent per-qubit unitaries call this; it
/// raises kProtocol when `mask` covers both members of a mirrored pair.
void require_independent_unitaries(const MeasurementDataset &ds, std::uint64_t mask, const char *what);

MeasurementDataset restrict_dataset(const MeasurementDataset &ds, const Qubits &qubits);

/// Contiguous split of the settings by fractions (summing to 1). Records keep
/// their original setting indices, so merge_datasets restores the input.
std::vector<MeasurementDataset> split_dataset(const MeasurementDataset &ds, const std::vector<double> &fractions);
MeasurementDataset merge_datasets(const std::vector<MeasurementDataset> &parts);

/// SHA-256 of the canonical serialization, lowercase hex.
std::string dataset_digest(const MeasurementDataset &ds);
std::string sha256_hex(const std::string &bytes);

std::string shot_to_hex(std::uint64_t bits, unsigned n_qubits);
std::uint64_t shot_from_hex(const std::string &hex, unsigned n_qubits);

}  // namespace rmkit
