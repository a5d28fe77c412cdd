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


#ifndef PHOTONSTAT_ARCHIVE_HPP
#define PHOTONSTAT_ARCHIVE_HPP

#include <cstdint>
#include <fstream>
#include <mutex>
#include <string>
#include <vector>

#include "photonstat/detection.hpp"

namespace photonstat {

/// Binary trace archive. Little-endian header
///     magic "PHST" | version u16 | sample_rate Hz u64 | trace_len u32 | n_shots u64 |
///     n_pulses u8 | if_freq Hz u64 | layout u8
/// followed by n_shots records of sig_a, sig_b, noise_a, noise_b, each trace_len float32
/// (I, Q) pairs. Records are stored in shot-index order.
struct ArchiveHeader {
    static constexpr uint16_t kVersion = 1;
    static constexpr uint8_t kLayoutSigNoiseAB = 0;  // sig_a, sig_b, noise_a, noise_b
    static constexpr size_t kSize = 36;

    uint16_t version = kVersion;
    uint64_t sample_rate = 0;
    uint32_t trace_len = 0;
    uint64_t n_shots = 0;
    uint8_t n_pulses = 0;
    uint64_t if_freq = 0;
    uint8_t layout = kLayoutSigNoiseAB;

    size_t record_bytes() const {
        return 4 * static_cast<size_t>(trace_len) * 2 * sizeof(float);
    }
    bool operator==(const ArchiveHeader &) const = default;
};

/// Writes shots into a preallocated archive. write() is safe to call from several threads;
/// each shot lands at the slot given by its shot_index.
class ArchiveWriter {
   public:
    /// Throws IoError when the file cannot be created.
    ArchiveWriter(const std::string &path, const ArchiveHeader &header);
    ~ArchiveWriter();

    /// Throws GeometryError on a trace length mismatch and IoError on an index outside
    /// the archive or a write failure.
    void write(const ShotRecord &shot);
    /// Flushes and closes; throws IoError when not every slot was written.
    void close();

    const ArchiveHeader &header() const {
        return header_;
    }

   private:
    std::string path_;
    ArchiveHeader header_;
    std::fstream out_;
    std::mutex mutex_;
    uint64_t written_ = 0;
    bool closed_ = false;
};

class ArchiveReader {
   public:
    /// Throws IoError on a missing file, bad magic, unknown version or truncated data.
    explicit ArchiveReader(const std::string &path);

    const ArchiveHeader &header() const {
        return header_;
    }
    ShotRecord read(uint64_t shot_index);
    std::vector<ShotRecord> read_all();

   private:
    std::string path_;
    ArchiveHeader header_;
    std::ifstream in_;
};

/// Header describing shots produced with `chain` and `train`.
ArchiveHeader make_archive_header(const ChainParams &chain, int n_pulses, uint64_t n_shots);

}  // namespace photonstat

#endif
