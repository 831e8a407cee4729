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

// Consolidated sensor table:
//   room,zone,timestamp,co2,temperature,humidity,brightness[,occupancy]

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "sitabench/data.hpp"
#include "sitabench/error.hpp"
#include "sitabench/text.hpp"
#include "sitabench/timestamp.hpp"

namespace sitabench {

inline void write_sensor_table(std::ostream& out,
                               const std::vector<SensorRecord>& records) {
  const bool with_occupancy =
      std::any_of(records.begin(), records.end(),
                  [](const SensorRecord& r) { return r.occupancy.has_value(); });
  csv::Row header = {"room",     "zone",       "timestamp", "co2",
                     "temperature", "humidity", "brightness"};
  if (with_occupancy) header.push_back("occupancy");
  csv::write_row(out, header);
  for (const SensorRecord& r : records) {
    csv::Row row = {r.room,
                    r.zone,
                    format_timestamp(r.timestamp),
                    format_decimal(r.co2),
                    format_decimal(r.temperature),
                    format_decimal(r.humidity),
                    format_decimal(r.brightness)};
    if (with_occupancy) {
      row.push_back(r.occupancy ? format_number(*r.occupancy) : "");
    }
    csv::write_row(out, row);
  }
}

inline std::vector<SensorRecord> read_sensor_table(std::istream& in) {
  csv::Row row;
  std::size_t line = 0;
  if (!csv::read_row(in, row, line)) return {};
  const csv::Row expected = {"room",     "zone",       "timestamp", "co2",
                             "temperature", "humidity", "brightness"};
  const bool with_occupancy = row.size() == 8 && row[7] == "occupancy";
  if (row.size() < 7 || !std::equal(expected.begin(), expected.end(),
                                    row.begin()) ||
      (row.size() == 8 && !with_occupancy) || row.size() > 8) {
    throw ParseError("unexpected sensor table header", 1, 1);
  }
  const std::size_t width = with_occupancy ? 8 : 7;

  std::vector<SensorRecord> records;
  while (csv::read_row(in, row, line)) {
    if (row.size() == 1 && row[0].empty()) continue;
    if (row.size() != width) {
      throw ParseError("expected " + std::to_string(width) + " fields", line,
                       1);
    }
    SensorRecord r;
    r.room = row[0];
    r.zone = row[1];
    try {
      r.timestamp = parse_timestamp(row[2]);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), line, 3);
    }
    double* targets[] = {&r.co2, &r.temperature, &r.humidity, &r.brightness};
    for (std::size_t i = 0; i < 4; ++i) {
      auto v = parse_number(row[3 + i]);
      if (!v || !std::isfinite(*v)) {
        throw ParseError("non-numeric measurement '" + row[3 + i] + "'", line,
                         4 + i);
      }
      *targets[i] = *v;
    }
    if (with_occupancy && !row[7].empty()) {
      auto v = parse_number(row[7]);
      if (!v || !std::isfinite(*v)) {
        throw ParseError("non-numeric occupancy '" + row[7] + "'", line, 8);
      }
      r.occupancy = *v;
    }
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace sitabench
