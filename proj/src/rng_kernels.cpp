// Copyright 2026 The photonstat Authors
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

// Compiled with relaxed floating-point flags (see src/CMakeLists.txt) so that log, sin
// and cos map onto the vector math library.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>

#include "photonstat/rng.hpp"

namespace photonstat::detail {

void philox_blocks(uint32_t first_block, uint32_t stream, uint64_t shot, std::array<uint32_t, 2> key, size_t blocks,
                   uint32_t *out) {
    const uint32_t shot_lo = static_cast<uint32_t>(shot);
    const uint32_t shot_hi = static_cast<uint32_t>(shot >> 32);
#pragma omp simd
    for (size_t b = 0; b < blocks; ++b) {
        uint32_t c0 = first_block + static_cast<uint32_t>(b), c1 = stream, c2 = shot_lo, c3 = shot_hi;
        uint32_t k0 = key[0], k1 = key[1];
        for (int round = 0; round < 10; ++round) {
            uint64_t p0 = uint64_t{0xD2511F53u} * c0;
            uint64_t p1 = uint64_t{0xCD9E8D57u} * c2;
            uint32_t n0 = static_cast<uint32_t>(p1 >> 32) ^ c1 ^ k0;
            uint32_t n2 = static_cast<uint32_t>(p0 >> 32) ^ c3 ^ k1;
            c1 = static_cast<uint32_t>(p1);
            c3 = static_cast<uint32_t>(p0);
            c0 = n0;
            c2 = n2;
            k0 += 0x9E3779B9u;
            k1 += 0xBB67AE85u;
        }
        out[4 * b + 0] = c0;
        out[4 * b + 1] = c1;
        out[4 * b + 2] = c2;
        out[4 * b + 3] = c3;
    }
}

void box_muller_complex(const uint32_t *bits, size_t count, double scale, double *re, double *im) {
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    constexpr double kInv32 = 0x1.0p-32;
    // Radius, then sine, then cosine, each in its own pass.
#pragma omp simd
    for (size_t k = 0; k < count; ++k) {
        double u1 = (static_cast<double>(bits[2 * k]) + 0.5) * kInv32;
        re[k] = scale * std::sqrt(-std::log(u1));
    }
#pragma omp simd
    for (size_t k = 0; k < count; ++k) {
        double theta = kTwoPi * ((static_cast<double>(bits[2 * k + 1]) + 0.5) * kInv32);
        im[k] = re[k] * std::sin(theta);
    }
#pragma omp simd
    for (size_t k = 0; k < count; ++k) {
        double theta = kTwoPi * ((static_cast<double>(bits[2 * k + 1]) + 0.5) * kInv32);
        re[k] = re[k] * std::cos(theta);
    }
}

}  // namespace photonstat::detail
