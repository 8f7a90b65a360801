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

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "rmkit/error.hpp"
#include "rmkit/state.hpp"

namespace rmkit {

/// Process exit codes.
enum ExitCode : int {
    kExitOk = 0,
    kExitInternal = 1,
    kExitConfig = 2,
    kExitSizeCap = 3,
    kExitData = 4,
    kExitProtocol = 5,
    kExitNoData = 6,
};

int exit_code_for(ErrorKind kind);

/// Runs one command line (without the program name). Result records go to
/// `out` as single-line JSON, human-readable summaries and errors to `err`.
int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

// ---- configuration documents --------------------------------------------------

/// {"kind": "tfim", "n": 5, "J": 1, "h": 0.7}, "xy", "mixed_field_ising" or
/// {"kind": "terms", "n": 3, "terms": [["ZZI", 1.0], ...]}.
HamiltonianSpec parse_hamiltonian(const nlohmann::json &j);

/// State description with optional "evolve" {"hamiltonian", "time"} and
/// "noise" {"kind", "p"} stages, applied in that order.
State parse_state(const nlohmann::json &j);

/// Sets a dotted key ("state.n", "m") to a value parsed as JSON, or as a
/// string when it does not parse.
void apply_override(nlohmann::json &config, const std::string &assignment);

/// "0,1,2" or "0-3" or a mix ("0-2,5").
Qubits parse_qubits(const std::string &text);

}  // namespace rmkit
