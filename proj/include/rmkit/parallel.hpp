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

#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <span>
#include <thread>
#include <vector>

namespace rmkit {

/// Process-wide worker count for acquisition and estimator loops. Results
/// never depend on it: work items are indexed and reduced in index order.
void set_num_threads(unsigned threads);
unsigned num_threads();

/// Calls body(i) for i in [0, n) on up to num_threads() workers using
/// contiguous static chunks. The first exception thrown is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)> &body);

/// Pairwise (tree) summation; fixed association order for a given length.
double pairwise_sum(std::span<const double> values);

/// SplitMix64 finalizer applied to (master, index); used to derive the
/// per-setting seed so generation is independent of call order.
std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index);

}  // namespace rmkit
