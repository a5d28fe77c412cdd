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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include "photonstat/archive.hpp"
#include "photonstat/errors.hpp"
#include "photonstat/pipeline.hpp"

using namespace photonstat;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string &name) {
    fs::path dir = fs::temp_directory_path() / "photonstat_test_archive";
    fs::create_directories(dir);
    return dir / name;
}

HbtSetup setup() {
    return HbtSetup::make(QubitParams::paper_preset(), PulseTrainSpec{}, ChainParams::twpa_preset());
}

void expect_float_equal(const IQTrace &got, const IQTrace &want) {
    ASSERT_EQ(got.size(), want.size());
    for (size_t k = 0; k < got.size(); ++k) {
        ASSERT_EQ(got.samples[k].real(), static_cast<double>(static_cast<float>(want.samples[k].real())));
        ASSERT_EQ(got.samples[k].imag(), static_cast<double>(static_cast<float>(want.samples[k].imag())));
    }
    EXPECT_EQ(got.dt, want.dt);
}

}  // namespace

TEST(Archive, HeaderLayout) {
    HbtSetup s = setup();
    ArchiveHeader h = make_archive_header(s.chain, 2, 3);
    EXPECT_EQ(h.sample_rate, 200000000u);
    EXPECT_EQ(h.trace_len, 320u);
    EXPECT_EQ(h.if_freq, 50000000u);
    EXPECT_EQ(h.record_bytes(), 4u * 320u * 8u);
    fs::path p = temp_file("header.phst");
    {
        ArchiveWriter w(p.string(), h);
        for (uint64_t i = 0; i < 3; ++i) {
            w.write(simulate_shot(s, vacuum_state(), 1, i));
        }
        w.close();
    }
    EXPECT_EQ(fs::file_size(p), ArchiveHeader::kSize + 3 * h.record_bytes());
    std::ifstream in(p, std::ios::binary);
    char magic[4];
    in.read(magic, 4);
    EXPECT_EQ(std::string(magic, 4), "PHST");
}

TEST(Archive, RoundTripConcurrentWrites) {
    HbtSetup s = setup();
    const uint64_t n = 16;
    PreparedState st = prepare_state(M_PI / 2, 1.0);
    std::vector<ShotRecord> shots;
    for (uint64_t i = 0; i < n; ++i) {
        shots.push_back(simulate_shot(s, st, 5, i));
    }
    fs::path p = temp_file("roundtrip.phst");
    {
        ArchiveWriter w(p.string(), make_archive_header(s.chain, 2, n));
        std::vector<std::thread> threads;
        for (int t = 0; t < 4; ++t) {
            threads.emplace_back([&, t] {
                for (uint64_t i = static_cast<uint64_t>(t); i < n; i += 4) {
                    w.write(shots[i]);
                }
            });
        }
        for (auto &th : threads) {
            th.join();
        }
        w.close();
    }
    ArchiveReader r(p.string());
    EXPECT_EQ(r.header(), make_archive_header(s.chain, 2, n));
    std::vector<ShotRecord> back = r.read_all();
    ASSERT_EQ(back.size(), n);
    for (uint64_t i = 0; i < n; ++i) {
        EXPECT_EQ(back[i].shot_index, i);
        expect_float_equal(back[i].sig_a, shots[i].sig_a);
        expect_float_equal(back[i].sig_b, shots[i].sig_b);
        expect_float_equal(back[i].noise_a, shots[i].noise_a);
        expect_float_equal(back[i].noise_b, shots[i].noise_b);
    }
    EXPECT_THROW(r.read(n), IoError);
}

TEST(Archive, IncompleteArchiveRejectedOnClose) {
    HbtSetup s = setup();
    fs::path p = temp_file("incomplete.phst");
    ArchiveWriter w(p.string(), make_archive_header(s.chain, 2, 2));
    w.write(simulate_shot(s, vacuum_state(), 1, 0));
    EXPECT_THROW(w.write(simulate_shot(s, vacuum_state(), 1, 5)), IoError);
    EXPECT_THROW(w.close(), IoError);
}

TEST(Archive, GeometryMismatchRejected) {
    HbtSetup s = setup();
    fs::path p = temp_file("geometry.phst");
    ArchiveHeader h = make_archive_header(s.chain, 2, 1);
    h.trace_len = 100;
    ArchiveWriter w(p.string(), h);
    EXPECT_THROW(w.write(simulate_shot(s, vacuum_state(), 1, 0)), GeometryError);
}

TEST(Archive, CorruptFilesRejected) {
    fs::path p = temp_file("bad_magic.phst");
    {
        std::ofstream out(p, std::ios::binary);
        out << std::string(64, 'x');
    }
    EXPECT_THROW(ArchiveReader{p.string()}, IoError);
    EXPECT_THROW(ArchiveReader{temp_file("missing.phst").string()}, IoError);

    HbtSetup s = setup();
    fs::path q = temp_file("truncated.phst");
    {
        ArchiveWriter w(q.string(), make_archive_header(s.chain, 2, 1));
        w.write(simulate_shot(s, vacuum_state(), 1, 0));
        w.close();
    }
    fs::resize_file(q, fs::file_size(q) - 8);
    EXPECT_THROW(ArchiveReader{q.string()}, IoError);
}
