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

#ifndef PHOTONSTAT_RNG_HPP
#define PHOTONSTAT_RNG_HPP

#include <array>
#include <complex>
#include <cstdint>
#include <span>

namespace photonstat {

/// Philox-4x32-10 counter-based generator (Salmon et al., SC'11). Stateless: the output
/// is a pure function of (counter, key).
std::array<uint32_t, 4> philox4x32(std::array<uint32_t, 4> counter, std::array<uint32_t, 2> key);

// Stream tags partition the counter space of one shot.
inline constexpr uint32_t kPulseStreamBase = 0x0000'0000u;  // + pulse index
inline constexpr uint32_t kTraceStreamBase = 0x8000'0000u;  // + trace slot (sig_a, sig_b, noise_a, noise_b)
inline constexpr uint32_t kPilotStreamBase = 0x4000'0000u;

/// A reproducible random stream keyed by (seed, shot_index, stream). Draws advance a
/// 32-bit block counter, so two streams with different keys never overlap and the
/// values drawn never depend on which worker or in which order shots are generated.
class KeyedStream {
   public:
    KeyedStream(uint64_t seed, uint64_t shot_index, uint32_t stream);

    uint32_t next_u32();
    /// Uniform on the open interval (0, 1) with 53 random bits.
    double uniform();
    /// Standard normal, N(0, 1).
    double normal();
    /// Circular complex normal with E|z|^2 = 1.
    std::complex<double> complex_normal();

    /// Fills (re[k], im[k]) with independent circular complex normals of E|z|^2 = variance.
    /// Consumes whole blocks; the stream is left at a block boundary.
    void fill_complex_normal(std::span<double> re, std::span<double> im, double variance);

    uint64_t blocks_consumed() const {
        return block_;
    }

   private:
    void refill();

    std::array<uint32_t, 2> key_;
    uint32_t stream_;
    uint64_t shot_;
    uint64_t block_ = 0;
    std::array<uint32_t, 4> buffer_{};
    int used_ = 4;
    bool has_spare_normal_ = false;
    double spare_normal_ = 0.0;
};

/// Derives an independent seed for a sub-experiment (e.g. one point of a sweep).
uint64_t derive_seed(uint64_t seed, uint64_t salt);

namespace detail {
// Vectorized kernels behind fill_complex_normal, kept in their own translation unit so
// they can be built with vector math flags.
// Philox blocks (first_block + b, stream, shot) for b in [0, blocks), 4 words each.
void philox_blocks(uint32_t first_block, uint32_t stream, uint64_t shot, std::array<uint32_t, 2> key, size_t blocks,
                   uint32_t *out);
// Box-Muller transform over packed 32-bit pairs.
void box_muller_complex(const uint32_t *bits, size_t count, double scale, double *re, double *im);
}  // namespace detail

}  // namespace photonstat

#endif
