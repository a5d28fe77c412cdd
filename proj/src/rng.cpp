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

#include "photonstat/rng.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace photonstat {

namespace {

constexpr uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(uint32_t a, uint32_t b, uint32_t &hi, uint32_t &lo) {
    uint64_t p = uint64_t{a} * uint64_t{b};
    hi = static_cast<uint32_t>(p >> 32);
    lo = static_cast<uint32_t>(p);
}

}  // namespace

std::array<uint32_t, 4> philox4x32(std::array<uint32_t, 4> ctr, std::array<uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
        mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kPhiloxW0;
        key[1] += kPhiloxW1;
    }
    return ctr;
}

uint64_t derive_seed(uint64_t seed, uint64_t salt) {
    // splitmix64 finalizer over the combined words
    uint64_t z = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

KeyedStream::KeyedStream(uint64_t seed, uint64_t shot_index, uint32_t stream)
    : key_{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32)}, stream_(stream), shot_(shot_index) {
}

void KeyedStream::refill() {
    buffer_ = philox4x32({static_cast<uint32_t>(block_), stream_, static_cast<uint32_t>(shot_),
                          static_cast<uint32_t>(shot_ >> 32)},
                         key_);
    ++block_;
    used_ = 0;
}

uint32_t KeyedStream::next_u32() {
    if (used_ == 4) {
        refill();
    }
    return buffer_[used_++];
}

double KeyedStream::uniform() {
    uint64_t hi = next_u32() >> 5;  // 27 bits
    uint64_t lo = next_u32() >> 6;  // 26 bits
    // (k + 0.5) / 2^53 keeps the value strictly inside (0, 1).
    return (static_cast<double>((hi << 26) | lo) + 0.5) * 0x1.0p-53;
}

double KeyedStream::normal() {
    if (has_spare_normal_) {
        has_spare_normal_ = false;
        return spare_normal_;
    }
    double r = std::sqrt(-2.0 * std::log(uniform()));
    double theta = 2.0 * std::numbers::pi * uniform();
    spare_normal_ = r * std::sin(theta);
    has_spare_normal_ = true;
    return r * std::cos(theta);
}

std::complex<double> KeyedStream::complex_normal() {
    double r = std::sqrt(-std::log(uniform()));
    double theta = 2.0 * std::numbers::pi * uniform();
    return {r * std::cos(theta), r * std::sin(theta)};
}

void KeyedStream::fill_complex_normal(std::span<double> re, std::span<double> im, double variance) {
    size_t n = re.size();
    // Two complex samples per Philox block.
    size_t blocks = (n + 1) / 2;
    thread_local std::vector<uint32_t> bits;
    bits.resize(blocks * 4);
    detail::philox_blocks(static_cast<uint32_t>(block_), stream_, shot_, key_, blocks, bits.data());
    block_ += blocks;
    used_ = 4;
    has_spare_normal_ = false;
    detail::box_muller_complex(bits.data(), n, std::sqrt(variance), re.data(), im.data());
}

}  // namespace photonstat
