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

namespace rmkit::kernels::scalar {

namespace {

// Written out in real arithmetic so the AVX2 path can reproduce the exact
// operation order: re = ur*ar - ui*ai, im = ur*ai + ui*ar.
inline void cmul_add(double ur, double ui, double ar, double ai, double vr, double vi, double br, double bi,
                     double &out_r, double &out_i) {
    double t_r = ur * ar - ui * ai;
    double t_i = ur * ai + ui * ar;
    double s_r = vr * br - vi * bi;
    double s_i = vr * bi + vi * br;
    out_r = t_r + s_r;
    out_i = t_i + s_i;
}

}  // namespace

void apply_1q(std::span<Complex> amps, unsigned bit, const Mat2 &u) {
    const std::size_t stride = std::size_t{1} << bit;
    const std::size_t n = amps.size();
    double *d = reinterpret_cast<double *>(amps.data());
    const double u00r = u[0].real(), u00i = u[0].imag(), u01r = u[1].real(), u01i = u[1].imag();
    const double u10r = u[2].real(), u10i = u[2].imag(), u11r = u[3].real(), u11i = u[3].imag();
    for (std::size_t base = 0; base < n; base += 2 * stride) {
        for (std::size_t i = base; i < base + stride; ++i) {
            const std::size_t j = i + stride;
            const double ar = d[2 * i], ai = d[2 * i + 1], br = d[2 * j], bi = d[2 * j + 1];
            double r0, i0, r1, i1;
            cmul_add(u00r, u00i, ar, ai, u01r, u01i, br, bi, r0, i0);
            cmul_add(u10r, u10i, ar, ai, u11r, u11i, br, bi, r1, i1);
            d[2 * i] = r0;
            d[2 * i + 1] = i0;
            d[2 * j] = r1;
            d[2 * j + 1] = i1;
        }
    }
}

void probabilities(std::span<const Complex> amps, std::span<double> out) {
    const double *d = reinterpret_cast<const double *>(amps.data());
    for (std::size_t i = 0; i < amps.size(); ++i) {
        double re = d[2 * i], im = d[2 * i + 1];
        out[i] = re * re + im * im;
    }
}

void hamming_histogram(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b, std::uint64_t mask,
                       std::span<std::uint64_t> hist) {
    for (std::uint64_t x : a) {
        for (std::uint64_t y : b) {
            ++hist[std::popcount((x ^ y) & mask)];
        }
    }
}

void hamming_histogram_self(std::span<const std::uint64_t> a, std::uint64_t mask, std::span<std::uint64_t> hist) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = i + 1; j < a.size(); ++j) {
            hist[std::popcount((a[i] ^ a[j]) & mask)] += 2;
        }
    }
}

}  // namespace rmkit::kernels::scalar
