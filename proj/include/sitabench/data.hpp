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

// Sensor ingestion: per-sensor JSON files, consolidation into one record per
// (room, zone, timestamp), range cleaning, and a synthetic generator that
// stands in for a real building when no data is available.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "sitabench/error.hpp"
#include "sitabench/random.hpp"
#include "sitabench/text.hpp"
#include "sitabench/timestamp.hpp"

namespace sitabench {

enum class SensorKind { co2, temperature, humidity, brightness, occupancy };

inline constexpr std::array<SensorKind, 5> kAllSensorKinds = {
    SensorKind::co2, SensorKind::temperature, SensorKind::humidity,
    SensorKind::brightness, SensorKind::occupancy};

inline std::string_view to_string(SensorKind kind) {
  switch (kind) {
    case SensorKind::co2: return "co2";
    case SensorKind::temperature: return "temperature";
    case SensorKind::humidity: return "humidity";
    case SensorKind::brightness: return "brightness";
    case SensorKind::occupancy: return "occupancy";
  }
  return "unknown";
}

inline std::optional<SensorKind> parse_sensor_kind(std::string_view name) {
  for (SensorKind kind : kAllSensorKinds) {
    if (to_string(kind) == name) return kind;
  }
  return std::nullopt;
}

/// Native unit of each sensor kind.
inline std::string_view native_unit(SensorKind kind) {
  switch (kind) {
    case SensorKind::co2: return "ppm";
    case SensorKind::temperature: return "degC";
    case SensorKind::humidity: return "%RH";
    case SensorKind::brightness: return "lm";
    case SensorKind::occupancy: return "persons";
  }
  return "";
}

/// Unit spellings accepted in the optional `unit` field of a sensor entry.
inline bool unit_matches(SensorKind kind, std::string_view unit) {
  static const std::map<SensorKind, std::vector<std::string_view>> aliases = {
      {SensorKind::co2, {"ppm"}},
      {SensorKind::temperature, {"degC", "C", "\xc2\xb0" "C", "celsius"}},
      {SensorKind::humidity, {"%RH", "%", "RH"}},
      {SensorKind::brightness, {"lm", "lumen", "lumens"}},
      {SensorKind::occupancy, {"persons", "people", "count"}},
  };
  const auto& accepted = aliases.at(kind);
  return std::find(accepted.begin(), accepted.end(), unit) != accepted.end();
}

struct RawReading {
  SensorKind kind = SensorKind::co2;
  std::string room;
  std::string zone;
  Timestamp timestamp{};
  double value = 0.0;

  friend bool operator==(const RawReading&, const RawReading&) = default;
};

struct SensorRecord {
  std::string room;
  std::string zone;
  Timestamp timestamp{};
  double co2 = 0.0;
  double temperature = 0.0;
  double humidity = 0.0;
  double brightness = 0.0;
  std::optional<double> occupancy;

  friend bool operator==(const SensorRecord&, const SensorRecord&) = default;
};

// ---------------------------------------------------------------------------
// Parsing

struct ParseResult {
  std::vector<RawReading> readings;
  std::size_t skipped = 0;
  std::vector<std::string> warnings;
};

namespace detail {

inline std::pair<std::size_t, std::size_t> line_and_column(
    std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < offset; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

}  // namespace detail

/// Parses one per-sensor file: a JSON array of objects with string fields
/// `room`, `zone`, `timestamp` (14 digits) and a numeric `value`; an optional
/// `unit` string must name the sensor's unit. Entries that violate the entry
/// schema are skipped and counted, syntax errors throw ParseError.
inline ParseResult parse_sensor_file(std::string_view bytes, SensorKind kind) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::parse_error& e) {
    // nlohmann reports the 1-based offset of the offending byte.
    const std::size_t offset = e.byte > 0 ? e.byte - 1 : 0;
    auto [line, column] = detail::line_and_column(bytes, offset);
    throw ParseError(std::string("malformed JSON in ") +
                         std::string(to_string(kind)) + " file",
                     line, column);
  }
  if (!doc.is_array()) {
    throw ParseError("sensor file must contain a JSON array", 1, 1);
  }

  ParseResult result;
  std::size_t index = 0;
  auto skip = [&](const std::string& why) {
    ++result.skipped;
    result.warnings.push_back("entry " + std::to_string(index) + ": " + why);
  };
  for (const auto& entry : doc) {
    if (!entry.is_object()) {
      skip("not an object");
    } else if (!entry.contains("room") || !entry["room"].is_string() ||
               !entry.contains("zone") || !entry["zone"].is_string() ||
               !entry.contains("timestamp") ||
               !entry["timestamp"].is_string() || !entry.contains("value")) {
      skip("missing room/zone/timestamp/value");
    } else if (entry.contains("unit") &&
               (!entry["unit"].is_string() ||
                !unit_matches(kind, entry["unit"].get<std::string>()))) {
      skip("unknown unit " + entry["unit"].dump());
    } else {
      std::optional<double> value;
      const auto& v = entry["value"];
      if (v.is_number()) {
        value = v.get<double>();
      } else if (v.is_string()) {
        value = parse_number(v.get<std::string>());
      }
      std::optional<Timestamp> ts;
      try {
        ts = parse_timestamp(entry["timestamp"].get<std::string>());
      } catch (const ParseError&) {
      }
      if (!value || !std::isfinite(*value)) {
        skip("non-finite value " + v.dump());
      } else if (!ts) {
        skip("bad timestamp " + entry["timestamp"].dump());
      } else {
        result.readings.push_back(RawReading{
            kind, entry["room"].get<std::string>(),
            entry["zone"].get<std::string>(), *ts, *value});
      }
    }
    ++index;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Consolidation

struct ConsolidateResult {
  std::vector<SensorRecord> records;
  std::size_t dropped = 0;     // groups missing a mandatory measurement
  std::size_t duplicates = 0;  // readings overwritten by a later one
};

/// Groups readings by (room, zone, timestamp). A group becomes a record only
/// when co2, temperature, humidity and brightness are all present; a repeated
/// (key, kind) reading replaces the earlier one. Output is ordered by
/// (room, timestamp, zone).
inline ConsolidateResult consolidate(
    const std::vector<std::vector<RawReading>>& streams) {
  using Key = std::tuple<std::string, Timestamp, std::string>;
  struct Group {
    std::array<std::optional<double>, 5> values;
  };
  std::map<Key, Group> groups;
  ConsolidateResult result;
  for (const auto& stream : streams) {
    for (const RawReading& r : stream) {
      auto& slot = groups[Key{r.room, r.timestamp, r.zone}]
                       .values[static_cast<std::size_t>(r.kind)];
      if (slot) ++result.duplicates;
      slot = r.value;
    }
  }
  for (const auto& [key, group] : groups) {
    const auto& v = group.values;
    if (!v[0] || !v[1] || !v[2] || !v[3]) {
      ++result.dropped;
      continue;
    }
    result.records.push_back(SensorRecord{std::get<0>(key), std::get<2>(key),
                                          std::get<1>(key), *v[0], *v[1],
                                          *v[2], *v[3], v[4]});
  }
  return result;
}

// ---------------------------------------------------------------------------
// Cleaning

struct Range {
  double min = 0.0;
  double max = 0.0;

  bool contains(double v) const noexcept { return v >= min && v <= max; }
};

/// Inclusive per-measurement bounds. Occupancy is never range-checked.
struct CleaningRanges {
  Range co2{0.0, 1000.0};
  Range temperature{0.0, 50.0};
  Range humidity{0.0, 100.0};
  Range brightness{0.0, 2000.0};

  static CleaningRanges unbounded() {
    constexpr double lo = std::numeric_limits<double>::lowest();
    constexpr double hi = std::numeric_limits<double>::max();
    return {{lo, hi}, {lo, hi}, {lo, hi}, {lo, hi}};
  }

  void validate() const {
    const std::pair<const char*, const Range*> all[] = {
        {"co2", &co2},
        {"temperature", &temperature},
        {"humidity", &humidity},
        {"brightness", &brightness}};
    for (const auto& [name, r] : all) {
      if (!(r->min <= r->max)) {
        throw ConfigError(std::string("cleaning range for ") + name +
                          " has min > max");
      }
    }
  }

  bool accepts(const SensorRecord& r) const noexcept {
    return co2.contains(r.co2) && temperature.contains(r.temperature) &&
           humidity.contains(r.humidity) && brightness.contains(r.brightness);
  }
};

inline std::vector<SensorRecord> clean(const std::vector<SensorRecord>& records,
                                       const CleaningRanges& ranges) {
  ranges.validate();
  std::vector<SensorRecord> kept;
  kept.reserve(records.size());
  std::copy_if(records.begin(), records.end(), std::back_inserter(kept),
               [&](const SensorRecord& r) { return ranges.accepts(r); });
  return kept;
}

// ---------------------------------------------------------------------------
// Synthesis

struct SynthRoom {
  std::string room;
  std::string zone;
  int capacity = 2;       // occupants at full attendance
  double volume = 60.0;   // m^3
};

struct NoiseLevels {
  double co2 = 15.0;
  double temperature = 0.6;
  double humidity = 2.5;
  double brightness = 40.0;
};

/// Generator parameters. CO2 follows the discrete mass balance
///   c(t+dt) = c(t) + dt * (1e6 * G * n(t) / V - lambda(t) * (c(t) - c_out))
/// with G in m^3/s per person, V in m^3 and lambda in 1/s; lambda varies with
/// the season around `ventilation_rate`.
struct SynthConfig {
  int n_rooms = 4;
  std::vector<SynthRoom> rooms;  // overrides the generated room list
  Timestamp start = make_timestamp(2018, 10, 1);
  Timestamp end = make_timestamp(2020, 4, 1);  // exclusive
  std::int64_t interval_seconds = 900;

  // Probability that a seat is taken, by hour of day, Monday to Friday.
  std::array<double, 24> weekday_profile = {
      0.0, 0.0,  0.0, 0.0, 0.0, 0.0, 0.0, 0.05, 0.35, 0.75, 0.85, 0.8,
      0.45, 0.6, 0.8, 0.8, 0.65, 0.35, 0.15, 0.05, 0.0, 0.0, 0.0, 0.0};
  double weekend_factor = 0.1;
  // Chance a room keeps its current head count from one step to the next.
  double occupancy_persistence = 0.6;

  double outdoor_co2 = 420.0;             // ppm
  double generation_per_person = 5.0e-6;  // m^3/s
  double ventilation_rate = 4.0e-4;       // 1/s
  double ventilation_seasonality = 0.4;   // relative amplitude

  double lights_lm = 380.0;
  NoiseLevels noise;
  std::uint64_t seed = 10;
  // 0 keeps every generated record; otherwise a seeded uniform subset of
  // this size is returned in time order.
  std::size_t max_records = 20000;

  std::vector<SynthRoom> room_list() const {
    if (!rooms.empty()) return rooms;
    static constexpr const char* floors[] = {"G", "1", "2", "3"};
    static constexpr int capacities[] = {2, 3, 4, 2};
    static constexpr double volumes[] = {45.0, 60.0, 90.0, 50.0};
    std::vector<SynthRoom> out;
    for (int r = 0; r < n_rooms; ++r) {
      const auto i = static_cast<std::size_t>(r % 4);
      std::string number = std::to_string(10 + 7 * r);
      number.insert(0, 3 - std::min<std::size_t>(3, number.size()), '0');
      out.push_back(SynthRoom{std::string(floors[i]) + "." + number,
                              std::to_string(1 + r % 3), capacities[i],
                              volumes[i]});
    }
    return out;
  }

  void validate() const {
    if (rooms.empty() && n_rooms < 1) throw ConfigError("n_rooms must be >= 1");
    if (!(end > start)) throw ConfigError("synthesis span is empty");
    if (interval_seconds <= 0) throw ConfigError("interval must be > 0");
    const NoiseLevels& n = noise;
    if (n.co2 < 0 || n.temperature < 0 || n.humidity < 0 ||
        n.brightness < 0) {
      throw ConfigError("noise standard deviations must be >= 0");
    }
    for (double p : weekday_profile) {
      if (!(p >= 0.0 && p <= 1.0)) {
        throw ConfigError("weekday profile values must lie in [0, 1]");
      }
    }
    if (!(weekend_factor >= 0.0 && weekend_factor <= 1.0)) {
      throw ConfigError("weekend_factor must lie in [0, 1]");
    }
    if (!(occupancy_persistence >= 0.0 && occupancy_persistence <= 1.0)) {
      throw ConfigError("occupancy_persistence must lie in [0, 1]");
    }
    if (generation_per_person < 0 || ventilation_rate <= 0 ||
        ventilation_seasonality < 0 || ventilation_seasonality >= 1) {
      throw ConfigError("invalid ventilation/generation parameters");
    }
    const double max_rate = ventilation_rate * (1 + ventilation_seasonality);
    if (max_rate * static_cast<double>(interval_seconds) > 1.0) {
      throw ConfigError("ventilation_rate * interval must not exceed 1");
    }
    for (const SynthRoom& room : room_list()) {
      if (room.capacity < 0 || !(room.volume > 0)) {
        throw ConfigError("room " + room.room + " has invalid capacity/volume");
      }
    }
  }
};

namespace detail {

inline double round_to(double value, double step) {
  // Divide by the integer reciprocal so 435.4 prints as 435.4.
  const double inv = std::round(1.0 / step);
  if (inv >= 1.0 && std::abs(inv * step - 1.0) < 1e-12) {
    return std::round(value * inv) / inv;
  }
  return std::round(value / step) * step;
}

inline double day_of_year(const CivilTime& c) {
  using namespace std::chrono;
  const sys_days day{year{c.year} / month{c.month} / std::chrono::day{c.day}};
  const sys_days jan1{year{c.year} / January / 1};
  return static_cast<double>((day - jan1).count());
}

}  // namespace detail

/// Deterministic in `cfg.seed`. Every record lies inside the default
/// cleaning ranges.
inline std::vector<SensorRecord> synthesize(const SynthConfig& cfg) {
  cfg.validate();
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const CleaningRanges limits;
  const auto rooms = cfg.room_list();
  const auto dt = static_cast<double>(cfg.interval_seconds);

  std::vector<SensorRecord> out;
  for (std::size_t r = 0; r < rooms.size(); ++r) {
    const SynthRoom& room = rooms[r];
    SplitMix64 occupancy_rng = SplitMix64::stream(cfg.seed, 2 * r);
    SplitMix64 noise_rng = SplitMix64::stream(cfg.seed, 2 * r + 1);
    double c = cfg.outdoor_co2;
    int n = 0;
    for (Timestamp t = cfg.start; t < cfg.end;
         t += std::chrono::seconds{cfg.interval_seconds}) {
      const CivilTime civil = to_civil(t);
      const double hour = civil.hour + civil.minute / 60.0 +
                          civil.second / 3600.0;
      // +1 in mid July, -1 in mid January.
      const double season =
          std::cos(two_pi * (detail::day_of_year(civil) - 196.0) / 365.0);
      const bool weekend = weekday_index(t) >= 5;

      double p = cfg.weekday_profile[civil.hour];
      if (weekend) p *= cfg.weekend_factor;
      if (!occupancy_rng.bernoulli(cfg.occupancy_persistence)) {
        n = 0;
        for (int seat = 0; seat < room.capacity; ++seat) {
          if (occupancy_rng.bernoulli(p)) ++n;
        }
      } else if (p == 0.0) {
        n = 0;
      }

      const double lambda =
          cfg.ventilation_rate * (1.0 + cfg.ventilation_seasonality * season);
      c += dt * (1e6 * cfg.generation_per_person * n / room.volume -
                 lambda * (c - cfg.outdoor_co2));

      const double diurnal = std::sin(two_pi * (hour - 9.0) / 24.0);
      const double daylight =
          std::max(0.0, std::sin(std::numbers::pi * (hour - 6.0) / 12.0)) *
          (300.0 + 150.0 * season);

      SensorRecord rec;
      rec.room = room.room;
      rec.zone = room.zone;
      rec.timestamp = t;
      rec.co2 = c + cfg.noise.co2 * noise_rng.normal();
      rec.temperature = 21.0 + 3.0 * season + 1.5 * diurnal + 0.3 * n +
                        cfg.noise.temperature * noise_rng.normal();
      rec.humidity = 45.0 + 8.0 * season - 4.0 * diurnal + 1.0 * n +
                     cfg.noise.humidity * noise_rng.normal();
      rec.brightness = daylight + (n > 0 ? cfg.lights_lm : 0.0) +
                       cfg.noise.brightness * noise_rng.normal();
      rec.occupancy = static_cast<double>(n);

      auto bound = [](double v, const Range& range, double step) {
        return std::clamp(detail::round_to(v, step), range.min, range.max);
      };
      rec.co2 = bound(rec.co2, limits.co2, 0.1);
      rec.temperature = bound(rec.temperature, limits.temperature, 0.1);
      rec.humidity = bound(rec.humidity, limits.humidity, 0.1);
      rec.brightness = bound(rec.brightness, limits.brightness, 0.1);
      out.push_back(std::move(rec));
    }
  }

  if (cfg.max_records > 0 && out.size() > cfg.max_records) {
    std::vector<std::size_t> index(out.size());
    for (std::size_t i = 0; i < index.size(); ++i) index[i] = i;
    SplitMix64 rng = SplitMix64::stream(cfg.seed, 0xffff'ffffULL);
    // Partial Fisher-Yates: the first max_records slots form the sample.
    for (std::size_t i = 0; i < cfg.max_records; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(
                                    rng.below(index.size() - i));
      std::swap(index[i], index[j]);
    }
    index.resize(cfg.max_records);
    std::sort(index.begin(), index.end());
    std::vector<SensorRecord> sample;
    sample.reserve(index.size());
    for (std::size_t i : index) sample.push_back(std::move(out[i]));
    out = std::move(sample);
  }

  std::stable_sort(out.begin(), out.end(),
                   [](const SensorRecord& a, const SensorRecord& b) {
                     return std::tie(a.room, a.timestamp) <
                            std::tie(b.room, b.timestamp);
                   });
  return out;
}

}  // namespace sitabench
