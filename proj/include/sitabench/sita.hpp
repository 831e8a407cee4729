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

// SITA (Spatial, Identity, Temporal, Activity) privacy transformation.
//
// Each dimension carries a level from 0 (nothing released) to 4 (released
// unchanged). The levels in between generalize the fields of that dimension:
//
//   level  spatial (room, zone)   temporal (date, time)  activity (values)
//   0      deleted, deleted       deleted, deleted       deleted
//   1      building, deleted      YYYYMM01, deleted      nearest 100
//   2      floor, deleted         YYYYMMDD, deleted      nearest 10
//   3      room, deleted          YYYYMMDD, hh0000       fraction truncated
//   4      room, zone             YYYYMMDD, hhmmss       unchanged
//
// The identity dimension has no fields in building sensor data; its level is
// parsed and carried but applies no transformation.

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sitabench/data.hpp"
#include "sitabench/error.hpp"
#include "sitabench/text.hpp"
#include "sitabench/timestamp.hpp"

namespace sitabench::sita {

inline constexpr std::string_view kDeleted = "deleted";
inline constexpr std::string_view kBuilding = "building";
inline constexpr std::string_view kGroundFloor = "Ground Floor";
inline constexpr std::string_view kUnknownFloor = "Unknown Floor";

class SitaLevel {
 public:
  constexpr SitaLevel() = default;
  explicit SitaLevel(int value) : value_(value) {
    if (value < 0 || value > 4) {
      throw ConfigError("SITA level must be in 0..4, got " +
                        std::to_string(value));
    }
  }
  constexpr int value() const noexcept { return value_; }
  friend constexpr auto operator<=>(SitaLevel, SitaLevel) = default;

 private:
  int value_ = 4;
};

enum class Dimension { spatial = 0, identity = 1, temporal = 2, activity = 3 };

inline std::string_view to_string(Dimension d) {
  switch (d) {
    case Dimension::spatial: return "spatial";
    case Dimension::identity: return "identity";
    case Dimension::temporal: return "temporal";
    case Dimension::activity: return "activity";
  }
  return "unknown";
}

struct SitaConfig {
  SitaLevel spatial;
  SitaLevel identity;
  SitaLevel temporal;
  SitaLevel activity;

  SitaLevel level(Dimension d) const noexcept {
    switch (d) {
      case Dimension::spatial: return spatial;
      case Dimension::identity: return identity;
      case Dimension::temporal: return temporal;
      case Dimension::activity: return activity;
    }
    return spatial;
  }

  SitaLevel& level(Dimension d) noexcept {
    switch (d) {
      case Dimension::identity: return identity;
      case Dimension::temporal: return temporal;
      case Dimension::activity: return activity;
      default: return spatial;
    }
  }

  /// Canonical 4-digit form, S I T A.
  std::string str() const {
    return {static_cast<char>('0' + spatial.value()),
            static_cast<char>('0' + identity.value()),
            static_cast<char>('0' + temporal.value()),
            static_cast<char>('0' + activity.value())};
  }

  friend bool operator==(const SitaConfig&, const SitaConfig&) = default;
};

/// Digit i of `text` sets dimension i in the order S, I, T, A. Errors name
/// the 1-based offending position.
inline SitaConfig parse_config(std::string_view text) {
  if (text.size() != 4) {
    throw ConfigError("SITA configuration must have 4 digits, got '" +
                          std::string(text) + "'",
                      text.size() < 4 ? text.size() + 1 : 5);
  }
  SitaConfig cfg;
  for (std::size_t i = 0; i < 4; ++i) {
    const char ch = text[i];
    if (ch < '0' || ch > '4') {
      throw ConfigError("SITA configuration '" + std::string(text) +
                            "': position " + std::to_string(i + 1) +
                            " must be a digit 0-4",
                        i + 1);
    }
    cfg.level(static_cast<Dimension>(i)) = SitaLevel(ch - '0');
  }
  return cfg;
}

/// A released value or the explicit `deleted` marker.
template <class V>
class PrivateField {
 public:
  PrivateField() = default;  // deleted
  static PrivateField deleted() { return PrivateField(); }
  static PrivateField of(V value) { return PrivateField(std::move(value)); }

  bool is_deleted() const noexcept { return !value_.has_value(); }
  const V& value() const {
    if (!value_) throw Error("access to a deleted field");
    return *value_;
  }

  friend bool operator==(const PrivateField&, const PrivateField&) = default;

 private:
  explicit PrivateField(V v) : value_(std::move(v)) {}
  std::optional<V> value_;
};

struct SpatialFields {
  PrivateField<std::string> room;
  PrivateField<std::string> zone;
  bool unknown_floor = false;
};

struct TemporalFields {
  PrivateField<std::string> date;  // YYYYMMDD
  PrivateField<std::string> time;  // hhmmss
};

struct ActivityValues {
  double co2 = 0.0;
  double temperature = 0.0;
  double humidity = 0.0;
  double brightness = 0.0;
};

struct ActivityFields {
  PrivateField<double> co2;
  PrivateField<double> temperature;
  PrivateField<double> humidity;
  PrivateField<double> brightness;
};

/// Floor label from the room id prefix: "G.024" -> "Ground Floor",
/// "2.012" -> "Floor 2". Labels already in floor form map to themselves.
inline std::optional<std::string> floor_of(std::string_view room) {
  if (room == kGroundFloor || room == kUnknownFloor) return std::string(room);
  if (room.starts_with("Floor ")) {
    const auto rest = room.substr(6);
    if (!rest.empty() &&
        std::all_of(rest.begin(), rest.end(),
                    [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      return std::string(room);
    }
  }
  if (room.empty()) return std::nullopt;
  if (room.front() == 'G' || room.front() == 'g') {
    return std::string(kGroundFloor);
  }
  std::size_t digits = 0;
  while (digits < room.size() &&
         std::isdigit(static_cast<unsigned char>(room[digits]))) {
    ++digits;
  }
  if (digits == 0) return std::nullopt;
  // Strip leading zeros so "01.005" and "1.005" share a floor.
  std::string_view number = room.substr(0, digits);
  while (number.size() > 1 && number.front() == '0') number.remove_prefix(1);
  return "Floor " + std::string(number);
}

inline SpatialFields transform_spatial(const std::string& room,
                                       const std::string& zone,
                                       SitaLevel level) {
  using F = PrivateField<std::string>;
  switch (level.value()) {
    case 0: return {F::deleted(), F::deleted()};
    case 1: return {F::of(std::string(kBuilding)), F::deleted()};
    case 2: {
      auto floor = floor_of(room);
      if (!floor) return {F::of(std::string(kUnknownFloor)), F::deleted(), true};
      return {F::of(*floor), F::deleted()};
    }
    case 3: return {F::of(room), F::deleted()};
    default: return {F::of(room), F::of(zone)};
  }
}

inline TemporalFields transform_temporal(Timestamp ts, SitaLevel level) {
  using F = PrivateField<std::string>;
  CivilTime c = to_civil(ts);
  switch (level.value()) {
    case 0: return {F::deleted(), F::deleted()};
    case 1:
      c.day = 1;
      return {F::of(format_date(c)), F::deleted()};
    case 2: return {F::of(format_date(c)), F::deleted()};
    case 3:
      c.minute = 0;
      c.second = 0;
      return {F::of(format_date(c)), F::of(format_time(c))};
    default: return {F::of(format_date(c)), F::of(format_time(c))};
  }
}

/// Round half up on the signed value to a multiple of `step`.
inline double round_half_up(double value, double step) {
  return std::floor(value / step + 0.5) * step + 0.0;
}

inline double generalize_activity_value(double value, SitaLevel level) {
  switch (level.value()) {
    case 1: return round_half_up(value, 100.0);
    case 2: return round_half_up(value, 10.0);
    case 3: return std::trunc(value) + 0.0;
    default: return value;
  }
}

inline ActivityFields transform_activity(const ActivityValues& v,
                                         SitaLevel level) {
  using F = PrivateField<double>;
  if (level.value() == 0) {
    return {F::deleted(), F::deleted(), F::deleted(), F::deleted()};
  }
  return {F::of(generalize_activity_value(v.co2, level)),
          F::of(generalize_activity_value(v.temperature, level)),
          F::of(generalize_activity_value(v.humidity, level)),
          F::of(generalize_activity_value(v.brightness, level))};
}

struct PrivateRecord {
  SitaConfig config;
  PrivateField<std::string> room;
  PrivateField<std::string> zone;
  PrivateField<std::string> date;
  PrivateField<std::string> time;
  PrivateField<double> co2;
  PrivateField<double> temperature;
  PrivateField<double> humidity;
  PrivateField<double> brightness;
  // Ground truth carried through untouched; never written by the activity
  // transform and ignored by encoders unless explicitly requested.
  std::optional<double> occupancy;

  friend bool operator==(const PrivateRecord&, const PrivateRecord&) = default;
};

struct TransformStats {
  std::size_t records = 0;
  std::size_t unknown_floors = 0;
};

namespace detail {

// Fields of the identity dimension for this data set: none.
struct IdentityTransforms {
  static constexpr std::array<std::string_view, 0> fields{};
  static void apply(const SensorRecord&, SitaLevel, PrivateRecord&) {}
};

}  // namespace detail

inline PrivateRecord apply_config(const SensorRecord& record,
                                  const SitaConfig& cfg,
                                  TransformStats* stats = nullptr) {
  PrivateRecord out;
  out.config = cfg;
  SpatialFields spatial =
      transform_spatial(record.room, record.zone, cfg.spatial);
  detail::IdentityTransforms::apply(record, cfg.identity, out);
  TemporalFields temporal = transform_temporal(record.timestamp, cfg.temporal);
  ActivityFields activity = transform_activity(
      {record.co2, record.temperature, record.humidity, record.brightness},
      cfg.activity);
  out.room = std::move(spatial.room);
  out.zone = std::move(spatial.zone);
  out.date = std::move(temporal.date);
  out.time = std::move(temporal.time);
  out.co2 = activity.co2;
  out.temperature = activity.temperature;
  out.humidity = activity.humidity;
  out.brightness = activity.brightness;
  out.occupancy = record.occupancy;
  if (stats) {
    ++stats->records;
    if (spatial.unknown_floor) ++stats->unknown_floors;
  }
  return out;
}

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

inline std::vector<PrivateRecord> apply_dataset(
    const std::vector<SensorRecord>& records, const SitaConfig& cfg,
    const ProgressFn& progress = {}, TransformStats* stats = nullptr) {
  std::vector<PrivateRecord> out;
  out.reserve(records.size());
  const std::size_t step = std::max<std::size_t>(1, records.size() / 100);
  for (std::size_t i = 0; i < records.size(); ++i) {
    out.push_back(apply_config(records[i], cfg, stats));
    if (progress && ((i + 1) % step == 0 || i + 1 == records.size())) {
      progress(i + 1, records.size());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Private table: room,zone,date,time,co2,temperature,humidity,brightness

inline std::string format_text_field(const PrivateField<std::string>& f) {
  return f.is_deleted() ? std::string(kDeleted) : f.value();
}

/// Levels 1-3 release whole numbers and print without a fraction; level 4
/// releases the measurement and prints it as a decimal.
inline std::string format_activity_field(const PrivateField<double>& f,
                                         SitaLevel level) {
  if (f.is_deleted()) return std::string(kDeleted);
  return level.value() >= 4 ? format_decimal(f.value())
                            : format_number(f.value());
}

inline csv::Row private_row(const PrivateRecord& r) {
  const SitaLevel a = r.config.activity;
  return {format_text_field(r.room),          format_text_field(r.zone),
          format_text_field(r.date),          format_text_field(r.time),
          format_activity_field(r.co2, a),    format_activity_field(r.temperature, a),
          format_activity_field(r.humidity, a),
          format_activity_field(r.brightness, a)};
}

inline void write_private_table(std::ostream& out,
                                const std::vector<PrivateRecord>& records) {
  csv::write_row(out, {"room", "zone", "date", "time", "co2", "temperature",
                       "humidity", "brightness"});
  for (const PrivateRecord& r : records) csv::write_row(out, private_row(r));
}

/// Reads a private table written under `cfg`.
inline std::vector<PrivateRecord> read_private_table(std::istream& in,
                                                     const SitaConfig& cfg) {
  csv::Row row;
  std::size_t line = 0;
  if (!csv::read_row(in, row, line)) return {};
  const csv::Row expected = {"room", "zone", "date", "time", "co2",
                             "temperature", "humidity", "brightness"};
  if (row != expected) throw ParseError("unexpected private table header", 1, 1);
  std::vector<PrivateRecord> out;
  while (csv::read_row(in, row, line)) {
    if (row.size() == 1 && row[0].empty()) continue;
    if (row.size() != expected.size()) {
      throw ParseError("expected 8 fields", line, 1);
    }
    auto text = [&](std::size_t i) {
      return row[i] == kDeleted ? PrivateField<std::string>::deleted()
                                : PrivateField<std::string>::of(row[i]);
    };
    auto number = [&](std::size_t i) {
      if (row[i] == kDeleted) return PrivateField<double>::deleted();
      auto v = parse_number(row[i]);
      if (!v || !std::isfinite(*v)) {
        throw ParseError("non-numeric field '" + row[i] + "'", line, i + 1);
      }
      return PrivateField<double>::of(*v);
    };
    PrivateRecord r;
    r.config = cfg;
    r.room = text(0);
    r.zone = text(1);
    r.date = text(2);
    r.time = text(3);
    r.co2 = number(4);
    r.temperature = number(5);
    r.humidity = number(6);
    r.brightness = number(7);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace sitabench::sita
