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


#include "photonstat/manifest.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#include "photonstat/errors.hpp"

namespace photonstat {

namespace {

class Sha256 {
   public:
    Sha256() : ctx_(EVP_MD_CTX_new(), EVP_MD_CTX_free) {
        if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) {
            throw Error(ErrorKind::Io, "sha256: cannot initialize digest");
        }
    }
    void update(const void *data, size_t n) {
        EVP_DigestUpdate(ctx_.get(), data, n);
    }
    std::string hex() {
        unsigned char md[EVP_MAX_MD_SIZE];
        unsigned int len = 0;
        EVP_DigestFinal_ex(ctx_.get(), md, &len);
        std::ostringstream ss;
        for (unsigned int i = 0; i < len; ++i) {
            ss << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
        }
        return ss.str();
    }

   private:
    std::unique_ptr<EVP_MD_CTX, void (*)(EVP_MD_CTX *)> ctx_;
};

}  // namespace

std::string sha256_hex(std::string_view data) {
    Sha256 h;
    h.update(data.data(), data.size());
    return h.hex();
}

std::string sha256_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path);
    }
    Sha256 h;
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        h.update(buf.data(), static_cast<size_t>(in.gcount()));
    }
    if (in.bad()) {
        throw IoError("read failure on " + path);
    }
    return h.hex();
}

std::string utc_timestamp() {
    std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream ss;
    ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return ss.str();
}

void RunManifest::add_result(const std::string &dir, const std::string &name) {
    result_digests.emplace_back(name, sha256_file((std::filesystem::path(dir) / name).string()));
}

nlohmann::json RunManifest::to_json() const {
    nlohmann::json digests = nlohmann::json::object();
    for (const auto &[name, digest] : result_digests) {
        digests[name] = digest;
    }
    return {
        {"command", command},         {"config_hash", config_hash}, {"seed", seed},
        {"version", version},         {"started_at", started_at},   {"finished_at", finished_at},
        {"parameters", parameters},   {"warnings", warnings},       {"result_digests", digests},
    };
}

void RunManifest::write(const std::string &path) const {
    write_text_file(path, to_json().dump(2) + "\n");
}

void write_text_file(const std::string &path, const std::string &text) {
    std::filesystem::path p(path);
    std::error_code ec;
    if (p.has_parent_path()) {
        std::filesystem::create_directories(p.parent_path(), ec);
        if (ec) {
            throw IoError("cannot create directory " + p.parent_path().string() + ": " + ec.message());
        }
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path + " for writing");
    }
    out << text;
    out.flush();
    if (!out) {
        throw IoError("write failure on " + path);
    }
}

}  // namespace photonstat
