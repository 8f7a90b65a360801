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

#include <stdexcept>
#include <string>

namespace rmkit {

/// Failure categories. Each maps to a distinct CLI exit code.
enum class ErrorKind {
    kInvalidArgument,     // bad input to a library call (caller bug)
    kConfig,              // unparsable or inconsistent configuration
    kSizeCap,             // dense simulation or estimator size cap exceeded
    kIo,                  // file could not be opened / written
    kMalformed,           // dataset file is syntactically broken or truncated
    kVersion,             // dataset schema version not supported
    kInvariant,           // dataset parses but violates a structural invariant
    kProtocol,            // two inputs that must share a protocol do not
    kNoData,              // estimator has no usable samples
};

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string &msg) : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

  private:
    ErrorKind kind_;
};

/// Thrown by Pauli predictions when no setting is compatible with the observable.
class NoDataError : public Error {
  public:
    NoDataError(const std::string &msg, std::size_t compatible_count)
        : Error(ErrorKind::kNoData, msg), compatible_count_(compatible_count) {}
    std::size_t compatible_count() const noexcept { return compatible_count_; }

  private:
    std::size_t compatible_count_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string &msg) { throw Error(kind, msg); }

inline void require(bool cond, const std::string &msg) {
    if (!cond) {
        throw Error(ErrorKind::kInvalidArgument, msg);
    }
}

}  // namespace rmkit
