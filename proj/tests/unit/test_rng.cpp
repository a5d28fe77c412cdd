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


#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "photonstat/rng.hpp"

using namespace photonstat;

TEST(Philox, KnownAnswerZero) {
    auto out = philox4x32({0, 0, 0, 0}, {0, 0});
    EXPECT_EQ(out[0], 0x6627e8d5u);
    EXPECT_EQ(out[1], 0xe169c58du);
    EXPECT_EQ(out[2], 0xbc57ac4cu);
    EXPECT_EQ(out[3], 0x9b00dbd8u);
}

TEST(Philox, KnownAnswerPi) {
    auto out = philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
    EXPECT_EQ(out[0], 0xd16cfe09u);
    EXPECT_EQ(out[1], 0x94fdccebu);
    EXPECT_EQ(out[2], 0x5001e420u);
    EXPECT_EQ(out[3], 0x24126ea1u);
}

TEST(Philox, KnownAnswerOnes) {
    auto out = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
    EXPECT_EQ(out[0], 0x408f276du);
    EXPECT_EQ(out[1], 0x41c83b0eu);
    EXPECT_EQ(out[2], 0xa20bc7c6u);
    EXPECT_EQ(out[3], 0x6d5451fdu);
}

TEST(Philox, BlockKernelMatchesScalar) {
    const uint64_t shot = 0x123456789abcull;
    const std::array<uint32_t, 2> key{0xdeadbeefu, 0x01234567u};
    const size_t blocks = 37;
    std::vector<uint32_t> out(4 * blocks);
    detail::philox_blocks(5, 0x80000002u, shot, key, blocks, out.data());
    for (size_t b = 0; b < blocks; ++b) {
        auto ref = philox4x32({static_cast<uint32_t>(5 + b), 0x80000002u, static_cast<uint32_t>(shot),
                               static_cast<uint32_t>(shot >> 32)},
                              key);
        for (int w = 0; w < 4; ++w) {
            ASSERT_EQ(out[4 * b + w], ref[w]) << "block " << b << " word " << w;
        }
    }
}

TEST(KeyedStream, ReproducibleAndKeyed) {
    KeyedStream a(42, 7, 3), b(42, 7, 3), c(42, 8, 3), d(42, 7, 4), e(43, 7, 3);
    for (int i = 0; i < 16; ++i) {
        uint32_t va = a.next_u32();
        EXPECT_EQ(va, b.next_u32());
        (void)c;
    }
    KeyedStream a2(42, 7, 3);
    std::set<uint32_t> firsts = {a2.next_u32(), c.next_u32(), d.next_u32(), e.next_u32()};
    EXPECT_EQ(firsts.size(), 4u);
}

TEST(KeyedStream, UniformInOpenInterval) {
    KeyedStream s(1, 0, 0);
    double sum = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        double u = s.uniform();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    // Mean 1/2, sd of the mean 1/sqrt(12 n).
    EXPECT_NEAR(sum / n, 0.5, 5.0 / std::sqrt(12.0 * n));
}

TEST(KeyedStream, ComplexNormalMoments) {
    KeyedStream s(9, 1, 2);
    const int n = 200000;
    double m2 = 0, m4 = 0, re_im = 0;
    for (int i = 0; i < n; ++i) {
        auto z = s.complex_normal();
        m2 += std::norm(z);
        m4 += std::norm(z) * std::norm(z);
        re_im += z.real() * z.imag();
    }
    // |z|^2 ~ Exp(1): mean 1, variance 1, E|z|^4 = 2.
    EXPECT_NEAR(m2 / n, 1.0, 5.0 / std::sqrt(n));
    EXPECT_NEAR(m4 / n, 2.0, 5.0 * std::sqrt(20.0 / n));
    EXPECT_NEAR(re_im / n, 0.0, 5.0 * 0.5 / std::sqrt(n));
}

TEST(KeyedStream, FillComplexNormalMatchesScalarTransform) {
    const size_t n = 101;
    std::vector<double> re(n), im(n);
    KeyedStream s(77, 3, kTraceStreamBase + 1);
    s.fill_complex_normal(re, im, 4.0);
    EXPECT_EQ(s.blocks_consumed(), (n + 1) / 2);
    for (size_t k = 0; k < n; ++k) {
        auto block = philox4x32({static_cast<uint32_t>(k / 2), kTraceStreamBase + 1, 3, 0}, {77, 0});
        uint32_t b1 = block[2 * (k % 2)];
        uint32_t b2 = block[2 * (k % 2) + 1];
        double u1 = (b1 + 0.5) * 0x1.0p-32;
        double u2 = (b2 + 0.5) * 0x1.0p-32;
        double r = 2.0 * std::sqrt(-std::log(u1));
        EXPECT_NEAR(re[k], r * std::cos(2 * M_PI * u2), 1e-12);
        EXPECT_NEAR(im[k], r * std::sin(2 * M_PI * u2), 1e-12);
    }
}

TEST(KeyedStream, FillVarianceScales) {
    const size_t n = 200000;
    std::vector<double> re(n), im(n);
    KeyedStream s(5, 0, 0);
    s.fill_complex_normal(re, im, 3.0);
    double m = 0;
    for (size_t k = 0; k < n; ++k) {
        m += re[k] * re[k] + im[k] * im[k];
    }
    EXPECT_NEAR(m / n, 3.0, 5.0 * 3.0 / std::sqrt(n));
}

TEST(DeriveSeed, DistinctAndStable) {
    std::set<uint64_t> seeds;
    for (uint64_t i = 0; i < 1000; ++i) {
        seeds.insert(derive_seed(1, i));
    }
    EXPECT_EQ(seeds.size(), 1000u);
    EXPECT_EQ(derive_seed(1, 0), derive_seed(1, 0));
    EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
}
