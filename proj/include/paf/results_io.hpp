// Copyright 2026 The paf-retrieval Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <system_error>

#include <nlohmann/json.hpp>

#ifndef PAF_VERSION
#define PAF_VERSION "0.0.0"
#endif

namespace paf {

inline constexpr const char* kVersion = PAF_VERSION;

/// Files to publish plus the run manifest. File names are relative to the
/// output directory.
struct ResultSet {
  std::map<std::string, std::string> files;
  nlohmann::json manifest = nlohmann::json::object();
};

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Manifest skeleton {version, command, parameters, master_seed, started_at}.
inline nlohmann::json make_manifest(const std::string& command, nlohmann::json parameters,
                                    std::uint64_t master_seed) {
  return {{"version", kVersion},
          {"command", command},
          {"parameters", std::move(parameters)},
          {"master_seed", master_seed},
          {"started_at", utc_timestamp()}};
}

/// Writes `content` to `path` through a temporary sibling and a rename, so
/// readers never observe a partial file.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error(tmp.string() + ": cannot open for writing");
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    os.flush();
    if (!os) throw std::runtime_error(tmp.string() + ": write failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw std::runtime_error(path.string() + ": rename failed");
  }
}

/// Publishes every file, then manifest.json (listing the files) last.
inline void write_results(const std::filesystem::path& dir, const ResultSet& results) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw std::runtime_error(dir.string() + ": cannot create output directory");
  nlohmann::json manifest = results.manifest;
  manifest["files"] = nlohmann::json::array();
  for (const auto& [name, content] : results.files) {
    atomic_write(dir / name, content);
    manifest["files"].push_back(name);
  }
  atomic_write(dir / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace paf
