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


#ifndef PHOTONSTAT_MANIFEST_HPP
#define PHOTONSTAT_MANIFEST_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace photonstat {

inline constexpr const char *kVersion = "0.1.0";

/// Lower-case hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

/// SHA-256 of a file's bytes. Throws IoError when it cannot be read.
std::string sha256_file(const std::string &path);

/// Current UTC time as ISO 8601 with second resolution.
std::string utc_timestamp();

/// Provenance record written next to the result files. Timestamps live only here, so the
/// result files themselves are byte-identical across re-runs.
struct RunManifest {
    std::string command;
    std::string config_hash;
    uint64_t seed = 0;
    std::string version = kVersion;
    std::string started_at;
    std::string finished_at;
    nlohmann::json parameters;
    std::vector<std::string> warnings;
    std::vector<std::pair<std::string, std::string>> result_digests;  // file name, sha256

    /// Records the digest of `dir`/`name`.
    void add_result(const std::string &dir, const std::string &name);

    nlohmann::json to_json() const;
    /// Throws IoError on write failure.
    void write(const std::string &path) const;
};

/// Writes `text` to `path`, creating parent directories. Throws IoError on failure.
void write_text_file(const std::string &path, const std::string &text);

}  // namespace photonstat

#endif
