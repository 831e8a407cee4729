// Copyright 2026 The sitabench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Directory ingestion: every `<kind>*.json` file in a directory is parsed as
// a per-sensor file of that kind and the readings are consolidated.

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sitabench/data.hpp"
#include "sitabench/error.hpp"

namespace sitabench {

struct FileReport {
  std::string path;
  SensorKind kind = SensorKind::co2;
  std::size_t readings = 0;
  std::size_t skipped = 0;
};

struct IngestResult {
  ConsolidateResult consolidated;
  std::vector<FileReport> files;
  std::vector<std::string> warnings;
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Sensor kind encoded in a file name: the longest kind name the stem starts
/// with, e.g. "co2.json", "temperature_2019.json".
inline std::optional<SensorKind> kind_from_filename(
    const std::filesystem::path& path) {
  if (path.extension() != ".json") return std::nullopt;
  const std::string stem = path.stem().string();
  std::optional<SensorKind> best;
  std::size_t best_len = 0;
  for (SensorKind kind : kAllSensorKinds) {
    const auto name = to_string(kind);
    if (stem.starts_with(name) && name.size() > best_len &&
        (stem.size() == name.size() || !std::isalnum(static_cast<unsigned char>(
                                            stem[name.size()])))) {
      best = kind;
      best_len = name.size();
    }
  }
  return best;
}

inline IngestResult ingest_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error("not a directory: " + dir.string());
  }
  std::vector<std::filesystem::path> paths;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && kind_from_filename(entry.path())) {
      paths.push_back(entry.path());
    }
  }
  std::sort(paths.begin(), paths.end());
  if (paths.empty()) {
    throw Error("no <kind>*.json sensor files in " + dir.string());
  }
  IngestResult result;
  std::vector<std::vector<RawReading>> streams;
  for (const auto& path : paths) {
    const SensorKind kind = *kind_from_filename(path);
    ParseResult parsed;
    try {
      parsed = parse_sensor_file(read_file(path), kind);
    } catch (const ParseError& e) {
      throw ParseError(path.filename().string() + ": " + e.what());
    }
    result.files.push_back({path.string(), kind, parsed.readings.size(),
                            parsed.skipped});
    for (auto& w : parsed.warnings) {
      result.warnings.push_back(path.filename().string() + ": " + w);
    }
    streams.push_back(std::move(parsed.readings));
  }
  result.consolidated = consolidate(streams);
  return result;
}

}  // namespace sitabench
