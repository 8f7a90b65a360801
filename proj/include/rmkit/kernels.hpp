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

// Data-parallel inner loops shared by the simulator and the bitstring
// estimators. Every kernel has a portable scalar reference and, on x86-64,
// an AVX2 variant. The variant is picked once at startup from CPUID and can
// be pinned with RMKIT_ISA=scalar|avx2 or set_isa(). Variants are required to
// produce bit-identical results, so the choice never changes an output file.

#include <cstdint>
#include <span>
#include <string_view>

#include "rmkit/types.hpp"

namespace rmkit::kernels {

enum class Isa { kScalar, kAvx2 };

std::string_view isa_name(Isa isa);
bool isa_supported(Isa isa);
Isa active_isa();
/// Pins the implementation used by the dispatching entry points.
void set_isa(Isa isa);

/// Number of distinct Hamming distances for 64-bit words (0..64).
inline constexpr std::size_t kHistogramBins = 65;

// Dispatching entry points.

/// amps <- (I (x) u (x) I) amps, where u acts on bit `bit` of the flat index.
void apply_1q(std::span<Complex> amps, unsigned bit, const Mat2 &u);
/// out[i] = |amps[i]|^2.
void probabilities(std::span<const Complex> amps, std::span<double> out);
/// hist[d] += number of ordered pairs (a_i, b_j) with popcount((a_i ^ b_j) & mask) = d.
void hamming_histogram(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b, std::uint64_t mask,
                       std::span<std::uint64_t> hist);
/// Same as hamming_histogram(a, a, ...) but skipping the i == j diagonal.
void hamming_histogram_self(std::span<const std::uint64_t> a, std::uint64_t mask, std::span<std::uint64_t> hist);

namespace scalar {
void apply_1q(std::span<Complex> amps, unsigned bit, const Mat2 &u);
void probabilities(std::span<const Complex> amps, std::span<double> out);
void hamming_histogram(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b, std::uint64_t mask,
                       std::span<std::uint64_t> hist);
void hamming_histogram_self(std::span<const std::uint64_t> a, std::uint64_t mask, std::span<std::uint64_t> hist);
}  // namespace scalar

namespace avx2 {
void apply_1q(std::span<Complex> amps, unsigned bit, const Mat2 &u);
void probabilities(std::span<const Complex> amps, std::span<double> out);
void hamming_histogram(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b, std::uint64_t mask,
                       std::span<std::uint64_t> hist);
void hamming_histogram_self(std::span<const std::uint64_t> a, std::uint64_t mask, std::span<std::uint64_t> hist);
}  // namespace avx2

}  // namespace rmkit::kernels
