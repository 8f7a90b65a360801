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

#include <bit>

#include "rmkit/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define RMKIT_HAVE_X86 1
#include <immintrin.h>
#else
#define RMKIT_HAVE_X86 0
#endif

namespace rmkit::kernels::avx2 {

#if RMKIT_HAVE_X86

#define RMKIT_AVX2 __attribute__((target("avx2")))

namespace {

// (ur + i ui) * a for two packed complex numbers; same operation order as the
// scalar reference, no FMA.
RMKIT_AVX2 inline __m256d cmul(__m256d ur, __m256d ui, __m256d a) {
    __m256d swapped = _mm256_permute_pd(a, 0b0101);
    return _mm256_addsub_pd(_mm256_mul_pd(ur, a), _mm256_mul_pd(ui, swapped));
}

// Per-64-bit-lane popcount via nibble lookup (no AVX-512 VPOPCNTQ here).
RMKIT_AVX2 inline __m256i popcount_epi64(__m256i v) {
    const __m256i lookup = _mm256_setr_epi8(0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4, 0, 1, 1, 2, 1, 2, 2, 3, 1,
                                            2, 2, 3, 2, 3, 3, 4);
    const __m256i low_nibbles = _mm256_set1_epi8(0x0f);
    __m256i lo = _mm256_and_si256(v, low_nibbles);
    __m256i hi = _mm256_and_si256(_mm256_srli_epi16(v, 4), low_nibbles);
    __m256i counts = _mm256_add_epi8(_mm256_shuffle_epi8(lookup, lo), _mm256_shuffle_epi8(lookup, hi));
    return _mm256_sad_epu8(counts, _mm256_setzero_si256());
}

RMKIT_AVX2 inline void accumulate_row(std::uint64_t x, const std::uint64_t *b, std::size_t count, std::uint64_t mask,
                                      std::uint64_t *hist, std::uint64_t weight) {
    const __m256i vx = _mm256_set1_epi64x(static_cast<long long>(x));
    const __m256i vmask = _mm256_set1_epi64x(static_cast<long long>(mask));
    std::size_t j = 0;
    alignas(32) std::uint64_t lanes[4];
    for (; j + 4 <= count; j += 4) {
        __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i *>(b + j));
        __m256i d = popcount_epi64(_mm256_and_si256(_mm256_xor_si256(vx, vb), vmask));
        _mm256_store_si256(reinterpret_cast<__m256i *>(lanes), d);
        hist[lanes[0]] += weight;
        hist[lanes[1]] += weight;
        hist[lanes[2]] += weight;
        hist[lanes[3]] += weight;
    }
    for (; j < count; ++j) {
        hist[std::popcount((x ^ b[j]) & mask)] += weight;
    }
}

}  // namespace

RMKIT_AVX2 void apply_1q(std::span<Complex> amps, unsigned bit, const Mat2 &u) {
    const std::size_t stride = std::size_t{1} << bit;
    const std::size_t n = amps.size();
    double *d = reinterpret_cast<double *>(amps.data());
    if (stride == 1) {
        const __m256d c0r = _mm256_setr_pd(u[0].real(), u[0].real(), u[2].real(), u[2].real());
        const __m256d c0i = _mm256_setr_pd(u[0].imag(), u[0].imag(), u[2].imag(), u[2].imag());
        const __m256d c1r = _mm256_setr_pd(u[1].real(), u[1].real(), u[3].real(), u[3].real());
        const __m256d c1i = _mm256_setr_pd(u[1].imag(), u[1].imag(), u[3].imag(), u[3].imag());
        for (std::size_t i = 0; i < n; i += 2) {
            __m256d v = _mm256_loadu_pd(d + 2 * i);
            __m256d a = _mm256_permute2f128_pd(v, v, 0x00);
            __m256d b = _mm256_permute2f128_pd(v, v, 0x11);
            _mm256_storeu_pd(d + 2 * i, _mm256_add_pd(cmul(c0r, c0i, a), cmul(c1r, c1i, b)));
        }
        return;
    }
    const __m256d u00r = _mm256_set1_pd(u[0].real()), u00i = _mm256_set1_pd(u[0].imag());
    const __m256d u01r = _mm256_set1_pd(u[1].real()), u01i = _mm256_set1_pd(u[1].imag());
    const __m256d u10r = _mm256_set1_pd(u[2].real()), u10i = _mm256_set1_pd(u[2].imag());
    const __m256d u11r = _mm256_set1_pd(u[3].real()), u11i = _mm256_set1_pd(u[3].imag());
    for (std::size_t base = 0; base < n; base += 2 * stride) {
        for (std::size_t i = base; i < base + stride; i += 2) {
            const std::size_t j = i + stride;
            __m256d a = _mm256_loadu_pd(d + 2 * i);
            __m256d b = _mm256_loadu_pd(d + 2 * j);
            __m256d r0 = _mm256_add_pd(cmul(u00r, u00i, a), cmul(u01r, u01i, b));
            __m256d r1 = _mm256_add_pd(cmul(u10r, u10i, a), cmul(u11r, u11i, b));
            _mm256_storeu_pd(d + 2 * i, r0);
            _mm256_storeu_pd(d + 2 * j, r1);
        }
    }
}

RMKIT_AVX2 void probabilities(std::span<const Complex> amps, std::span<double> out) {
    const double *d = reinterpret_cast<const double *>(amps.data());
    const std::size_t n = amps.size();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d a = _mm256_loadu_pd(d + 2 * i);
        __m256d b = _mm256_loadu_pd(d + 2 * i + 4);
        // hadd gives [p0, p2, p1, p3]; restore index order.
        __m256d s = _mm256_hadd_pd(_mm256_mul_pd(a, a), _mm256_mul_pd(b, b));
        _mm256_storeu_pd(out.data() + i, _mm256_permute4x64_pd(s, 0b11011000));
    }
    for (; i < n; ++i) {
        double re = d[2 * i], im = d[2 * i + 1];
        out[i] = re * re + im * im;
    }
}

RMKIT_AVX2 void hamming_histogram(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b,
                                  std::uint64_t mask, std::span<std::uint64_t> hist) {
    for (std::uint64_t x : a) {
        accumulate_row(x, b.data(), b.size(), mask, hist.data(), 1);
    }
}

RMKIT_AVX2 void hamming_histogram_self(std::span<const std::uint64_t> a, std::uint64_t mask,
                                       std::span<std::uint64_t> hist) {
    for (std::size_t i = 0; i + 1 < a.size(); ++i) {
        accumulate_row(a[i], a.data() + i + 1, a.size() - i - 1, mask, hist.data(), 2);
    }
}

#else

void apply_1q(std::span<Complex> amps, unsigned bit, const Mat2 &u) { scalar::apply_1q(amps, bit, u); }
void probabilities(std::span<const Complex> amps, std::span<double> out) { scalar::probabilities(amps, out); }
void hamming_histogram(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b, std::uint64_t mask,
                       std::span<std::uint64_t> hist) {
    scalar::hamming_histogram(a, b, mask, hist);
}
void hamming_histogram_self(std::span<const std::uint64_t> a, std::uint64_t mask, std::span<std::uint64_t> hist) {
    scalar::hamming_histogram_self(a, mask, hist);
}

#endif

}  // namespace rmkit::kernels::avx2
