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


#include "photonstat/archive.hpp"

#include <cmath>
#include <cstring>
#include <filesystem>

#include "photonstat/errors.hpp"

namespace photonstat {

namespace {

constexpr char kMagic[4] = {'P', 'H', 'S', 'T'};

template <typename T>
void put_le(std::vector<unsigned char> &buf, T value) {
    for (size_t i = 0; i < sizeof(T); ++i) {
        buf.push_back(static_cast<unsigned char>(static_cast<uint64_t>(value) >> (8 * i)));
    }
}

template <typename T>
T get_le(const unsigned char *p) {
    uint64_t v = 0;
    for (size_t i = 0; i < sizeof(T); ++i) {
        v |= static_cast<uint64_t>(p[i]) << (8 * i);
    }
    return static_cast<T>(v);
}

void put_float(unsigned char *p, float f) {
    uint32_t bits;
    std::memcpy(&bits, &f, sizeof bits);
    for (int i = 0; i < 4; ++i) {
        p[i] = static_cast<unsigned char>(bits >> (8 * i));
    }
}

float get_float(const unsigned char *p) {
    uint32_t bits = get_le<uint32_t>(p);
    float f;
    std::memcpy(&f, &bits, sizeof f);
    return f;
}

std::vector<unsigned char> encode_header(const ArchiveHeader &h) {
    std::vector<unsigned char> buf(kMagic, kMagic + 4);
    put_le(buf, h.version);
    put_le(buf, h.sample_rate);
    put_le(buf, h.trace_len);
    put_le(buf, h.n_shots);
    put_le(buf, h.n_pulses);
    put_le(buf, h.if_freq);
    put_le(buf, h.layout);
    return buf;
}

}  // namespace

ArchiveHeader make_archive_header(const ChainParams &chain, int n_pulses, uint64_t n_shots) {
    ArchiveHeader h;
    h.sample_rate = static_cast<uint64_t>(std::llround(chain.sample_rate));
    h.trace_len = static_cast<uint32_t>(chain.trace_len);
    h.n_shots = n_shots;
    h.n_pulses = static_cast<uint8_t>(n_pulses);
    h.if_freq = chain.if_enabled ? static_cast<uint64_t>(std::llround(std::fabs(chain.if_freq))) : 0;
    return h;
}

ArchiveWriter::ArchiveWriter(const std::string &path, const ArchiveHeader &header) : path_(path), header_(header) {
    std::filesystem::path p(path);
    std::error_code ec;
    if (p.has_parent_path()) {
        std::filesystem::create_directories(p.parent_path(), ec);
    }
    out_.open(path, std::ios::binary | std::ios::in | std::ios::out | std::ios::trunc);
    if (!out_) {
        throw IoError("cannot create archive " + path);
    }
    auto buf = encode_header(header_);
    out_.write(reinterpret_cast<const char *>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!out_) {
        throw IoError("write failure on " + path);
    }
}

ArchiveWriter::~ArchiveWriter() {
    if (!closed_) {
        std::lock_guard lock(mutex_);
        out_.close();
    }
}

void ArchiveWriter::write(const ShotRecord &shot) {
    if (shot.shot_index >= header_.n_shots) {
        throw IoError("archive: shot index outside the archive");
    }
    const IQTrace *traces[4] = {&shot.sig_a, &shot.sig_b, &shot.noise_a, &shot.noise_b};
    std::vector<unsigned char> rec(header_.record_bytes());
    unsigned char *p = rec.data();
    for (const IQTrace *t : traces) {
        if (t->size() != header_.trace_len) {
            throw GeometryError("archive: trace length differs from the header");
        }
        for (const auto &s : t->samples) {
            put_float(p, static_cast<float>(s.real()));
            put_float(p + 4, static_cast<float>(s.imag()));
            p += 8;
        }
    }
    auto offset = static_cast<std::streamoff>(ArchiveHeader::kSize + shot.shot_index * rec.size());
    std::lock_guard lock(mutex_);
    out_.seekp(offset);
    out_.write(reinterpret_cast<const char *>(rec.data()), static_cast<std::streamsize>(rec.size()));
    if (!out_) {
        throw IoError("write failure on " + path_);
    }
    ++written_;
}

void ArchiveWriter::close() {
    std::lock_guard lock(mutex_);
    if (closed_) {
        return;
    }
    closed_ = true;
    out_.close();
    if (out_.fail()) {
        throw IoError("close failure on " + path_);
    }
    if (written_ != header_.n_shots) {
        throw IoError("archive " + path_ + " is incomplete");
    }
}

ArchiveReader::ArchiveReader(const std::string &path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) {
        throw IoError("cannot open archive " + path);
    }
    unsigned char buf[ArchiveHeader::kSize];
    in_.read(reinterpret_cast<char *>(buf), sizeof buf);
    if (in_.gcount() != static_cast<std::streamsize>(sizeof buf)) {
        throw IoError("archive " + path + " is shorter than its header");
    }
    if (std::memcmp(buf, kMagic, 4) != 0) {
        throw IoError("archive " + path + " has bad magic");
    }
    const unsigned char *p = buf + 4;
    header_.version = get_le<uint16_t>(p);
    header_.sample_rate = get_le<uint64_t>(p + 2);
    header_.trace_len = get_le<uint32_t>(p + 10);
    header_.n_shots = get_le<uint64_t>(p + 14);
    header_.n_pulses = get_le<uint8_t>(p + 22);
    header_.if_freq = get_le<uint64_t>(p + 23);
    header_.layout = get_le<uint8_t>(p + 31);
    if (header_.version != ArchiveHeader::kVersion) {
        throw IoError("archive " + path + " has unsupported version " + std::to_string(header_.version));
    }
    if (header_.layout != ArchiveHeader::kLayoutSigNoiseAB) {
        throw IoError("archive " + path + " has unknown channel layout");
    }
    if (header_.sample_rate == 0) {
        throw IoError("archive " + path + " has zero sample rate");
    }
    auto expected = ArchiveHeader::kSize + header_.n_shots * header_.record_bytes();
    std::error_code ec;
    auto size = std::filesystem::file_size(path, ec);
    if (ec || size < expected) {
        throw IoError("archive " + path + " is truncated");
    }
}

ShotRecord ArchiveReader::read(uint64_t shot_index) {
    if (shot_index >= header_.n_shots) {
        throw IoError("archive: shot index outside the archive");
    }
    std::vector<unsigned char> rec(header_.record_bytes());
    in_.seekg(static_cast<std::streamoff>(ArchiveHeader::kSize + shot_index * rec.size()));
    in_.read(reinterpret_cast<char *>(rec.data()), static_cast<std::streamsize>(rec.size()));
    if (!in_) {
        throw IoError("read failure on " + path_);
    }
    ShotRecord shot;
    shot.shot_index = shot_index;
    IQTrace *traces[4] = {&shot.sig_a, &shot.sig_b, &shot.noise_a, &shot.noise_b};
    const double dt = 1.0 / static_cast<double>(header_.sample_rate);
    const unsigned char *p = rec.data();
    for (int i = 0; i < 4; ++i) {
        IQTrace &t = *traces[i];
        t.dt = dt;
        t.channel = i % 2 == 0 ? Channel::A : Channel::B;
        t.kind = i < 2 ? TraceKind::Signal : TraceKind::NoiseRef;
        t.samples.resize(header_.trace_len);
        for (auto &s : t.samples) {
            s = {get_float(p), get_float(p + 4)};
            p += 8;
        }
    }
    return shot;
}

std::vector<ShotRecord> ArchiveReader::read_all() {
    std::vector<ShotRecord> shots;
    shots.reserve(header_.n_shots);
    for (uint64_t i = 0; i < header_.n_shots; ++i) {
        shots.push_back(read(i));
    }
    return shots;
}

}  // namespace photonstat
