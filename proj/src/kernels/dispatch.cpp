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

#include <atomic>
#include <cstdlib>
#include <string>

#include "rmkit/error.hpp"
#include "rmkit/kernels.hpp"

namespace rmkit::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

Isa detect() {
    if (const char *env = std::getenv("RMKIT_ISA")) {
        std::string v(env);
        if (v == "scalar") return Isa::kScalar;
        if (v == "avx2" && cpu_has_avx2()) return Isa::kAvx2;
    }
    return cpu_has_avx2() ? Isa::kAvx2 : Isa::kScalar;
}

std::atomic<Isa> &current() {
    static std::atomic<Isa> isa{detect()};
    return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) { return isa == Isa::kAvx2 ? "avx2" : "scalar"; }

bool isa_supported(Isa isa) { return isa == Isa::kScalar || cpu_has_avx2(); }

Isa active_isa() { return current().load(std::memory_order_relaxed); }

void set_isa(Isa isa) {
    require(isa_supported(isa), "set_isa: instruction set not supported on this CPU");
    current().store(isa, std::memory_order_relaxed);
}

void apply_1q(std::span<Complex> amps, unsigned bit, const Mat2 &u) {
    require((std::size_t{1} << bit) < amps.size(), "apply_1q: bit out of range");
    if (active_isa() == Isa::kAvx2) {
        avx2::apply_1q(amps, bit, u);
    } else {
        scalar::apply_1q(amps, bit, u);
    }
}

void probabilities(std::span<const Complex> amps, std::span<double> out) {
    require(out.size() == amps.size(), "probabilities: size mismatch");
    if (active_isa() == Isa::kAvx2) {
        avx2::probabilities(amps, out);
    } else {
        scalar::probabilities(amps, out);
    }
}

void hamming_histogram(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b, std::uint64_t mask,
                       std::span<std::uint64_t> hist) {
    require(hist.size() >= kHistogramBins, "hamming_histogram: histogram too small");
    if (active_isa() == Isa::kAvx2) {
        avx2::hamming_histogram(a, b, mask, hist);
    } else {
        scalar::hamming_histogram(a, b, mask, hist);
    }
}

void hamming_histogram_self(std::span<const std::uint64_t> a, std::uint64_t mask, std::span<std::uint64_t> hist) {
    require(hist.size() >= kHistogramBins, "hamming_histogram_self: histogram too small");
    if (active_isa() == Isa::kAvx2) {
        avx2::hamming_histogram_self(a, mask, hist);
    } else {
        scalar::hamming_histogram_self(a, mask, hist);
    }
}

}  // namespace rmkit::kernels
