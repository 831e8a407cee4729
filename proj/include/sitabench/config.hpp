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

// JSON configuration files for experiment sweeps and attack runs.
// Both carry `"schema_version": 1`; unknown keys are rejected so that a
// misspelled option fails loudly instead of silently using a default.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sitabench/attack.hpp"
#include "sitabench/data.hpp"
#include "sitabench/error.hpp"
#include "sitabench/eval.hpp"
#include "sitabench/models/encode.hpp"
#include "sitabench/models/model.hpp"
#include "sitabench/sita.hpp"

namespace sitabench::config {

inline constexpr int kSchemaVersion = 1;

using nlohmann::json;

namespace detail {

inline void allow_keys(const json& j, std::string_view where,
                       std::initializer_list<std::string_view> keys) {
  if (!j.is_object()) {
    throw ConfigError(std::string(where) + " must be a JSON object");
  }
  for (const auto& [key, value] : j.items()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw ConfigError("unknown key '" + key + "' in " + std::string(where));
    }
  }
}

template <class T>
void read(const json& j, const char* key, T& out, std::string_view where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string(where) + "." + key + " has the wrong type");
  }
}

inline void check_schema(const json& j) {
  if (!j.contains("schema_version")) {
    throw ConfigError("config is missing schema_version");
  }
  if (j["schema_version"] != kSchemaVersion) {
    throw ConfigError("unsupported schema_version " +
                      j["schema_version"].dump() + " (expected " +
                      std::to_string(kSchemaVersion) + ")");
  }
}

inline Timestamp read_time(const json& j, const char* key, Timestamp fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_string()) throw ConfigError(std::string(key) + " must be a string");
  try {
    return parse_timestamp(j[key].get<std::string>());
  } catch (const ParseError& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace detail

inline SynthConfig parse_synth(const json& j, std::uint64_t default_seed) {
  detail::allow_keys(j, "synth",
                     {"n_rooms", "rooms", "start", "end", "interval_seconds",
                      "weekday_profile", "weekend_factor",
                      "occupancy_persistence", "outdoor_co2",
                      "generation_per_person", "ventilation_rate",
                      "ventilation_seasonality", "lights_lm", "noise", "seed",
                      "max_records"});
  SynthConfig c;
  c.seed = default_seed;
  detail::read(j, "n_rooms", c.n_rooms, "synth");
  c.start = detail::read_time(j, "start", c.start);
  c.end = detail::read_time(j, "end", c.end);
  detail::read(j, "interval_seconds", c.interval_seconds, "synth");
  if (j.contains("weekday_profile")) {
    std::vector<double> profile;
    detail::read(j, "weekday_profile", profile, "synth");
    if (profile.size() != 24) {
      throw ConfigError("synth.weekday_profile needs 24 hourly values");
    }
    std::copy(profile.begin(), profile.end(), c.weekday_profile.begin());
  }
  detail::read(j, "weekend_factor", c.weekend_factor, "synth");
  detail::read(j, "occupancy_persistence", c.occupancy_persistence, "synth");
  detail::read(j, "outdoor_co2", c.outdoor_co2, "synth");
  detail::read(j, "generation_per_person", c.generation_per_person, "synth");
  detail::read(j, "ventilation_rate", c.ventilation_rate, "synth");
  detail::read(j, "ventilation_seasonality", c.ventilation_seasonality, "synth");
  detail::read(j, "lights_lm", c.lights_lm, "synth");
  detail::read(j, "seed", c.seed, "synth");
  detail::read(j, "max_records", c.max_records, "synth");
  if (j.contains("noise")) {
    const json& n = j["noise"];
    detail::allow_keys(n, "synth.noise",
                       {"co2", "temperature", "humidity", "brightness"});
    detail::read(n, "co2", c.noise.co2, "synth.noise");
    detail::read(n, "temperature", c.noise.temperature, "synth.noise");
    detail::read(n, "humidity", c.noise.humidity, "synth.noise");
    detail::read(n, "brightness", c.noise.brightness, "synth.noise");
  }
  if (j.contains("rooms")) {
    if (!j["rooms"].is_array()) throw ConfigError("synth.rooms must be an array");
    for (const json& r : j["rooms"]) {
      detail::allow_keys(r, "synth.rooms[]", {"room", "zone", "capacity", "volume"});
      SynthRoom room;
      detail::read(r, "room", room.room, "synth.rooms[]");
      detail::read(r, "zone", room.zone, "synth.rooms[]");
      detail::read(r, "capacity", room.capacity, "synth.rooms[]");
      detail::read(r, "volume", room.volume, "synth.rooms[]");
      if (room.room.empty()) throw ConfigError("synth.rooms[].room is required");
      c.rooms.push_back(room);
    }
  }
  c.validate();
  return c;
}

inline CleaningRanges parse_cleaning(const json& j) {
  detail::allow_keys(j, "cleaning", {"co2", "temperature", "humidity", "brightness"});
  CleaningRanges r;
  auto range = [&](const char* key, Range& out) {
    if (!j.contains(key)) return;
    std::vector<double> v;
    detail::read(j, key, v, "cleaning");
    if (v.size() != 2) throw ConfigError(std::string("cleaning.") + key + " needs [min, max]");
    out = {v[0], v[1]};
  };
  range("co2", r.co2);
  range("temperature", r.temperature);
  range("humidity", r.humidity);
  range("brightness", r.brightness);
  r.validate();
  return r;
}

enum class InputKind { synth, table, raw_dir };
enum class CvMode { train, full };

struct ExperimentConfig {
  InputKind input = InputKind::synth;
  SynthConfig synth;
  std::string input_path;
  CleaningRanges cleaning;
  std::vector<std::string> sweep = {"X444", "44X4", "444X"};
  std::vector<models::Algorithm> models = {std::begin(models::kAllAlgorithms),
                                           std::end(models::kAllAlgorithms)};
  eval::SplitSpec split;
  std::size_t folds = 10;
  bool shuffle = true;
  std::uint64_t fold_seed = 10;
  CvMode cv_mode = CvMode::train;
  models::EncodePolicy encoding;
  // Per-algorithm hyperparameters; seeds are the global seed.
  std::vector<models::ModelSpec> specs;
  std::uint64_t seed = 10;
  std::string output_dir = "out";
  unsigned jobs = 1;

  models::ModelSpec spec_for(models::Algorithm a) const {
    for (const auto& s : specs) {
      if (s.algorithm == a) return s;
    }
    return models::ModelSpec::defaults(a, seed);
  }

  /// Applies a new global seed to every seeded component.
  void reseed(std::uint64_t s) {
    seed = s;
    synth.seed = s;
    split.seed = s;
    fold_seed = s;
    for (auto& spec : specs) spec.seed = s;
  }
};

inline models::ModelSpec parse_model_params(models::Algorithm a, const json& j,
                                            std::uint64_t seed) {
  using models::Algorithm;
  models::ModelSpec spec = models::ModelSpec::defaults(a, seed);
  const std::string where = "model_params." + std::string(models::to_string(a));
  auto tree = [&](const json& t, models::TreeParams& out, const std::string& w) {
    detail::read(t, "max_depth", out.max_depth, w);
    detail::read(t, "min_samples_split", out.min_samples_split, w);
    detail::read(t, "min_samples_leaf", out.min_samples_leaf, w);
    detail::read(t, "max_features", out.max_features, w);
  };
  switch (a) {
    case Algorithm::lr:
      detail::allow_keys(j, where, {});
      break;
    case Algorithm::rr:
      detail::allow_keys(j, where, {"alpha"});
      detail::read(j, "alpha", spec.alpha, where);
      break;
    case Algorithm::dtr:
      detail::allow_keys(j, where, {"max_depth", "min_samples_split",
                                    "min_samples_leaf", "max_features"});
      tree(j, spec.tree, where);
      break;
    case Algorithm::rf:
      detail::allow_keys(j, where, {"n_estimators", "bootstrap", "max_depth",
                                    "min_samples_split", "min_samples_leaf",
                                    "max_features", "n_jobs"});
      detail::read(j, "n_estimators", spec.forest.n_estimators, where);
      detail::read(j, "bootstrap", spec.forest.bootstrap, where);
      detail::read(j, "n_jobs", spec.forest.n_jobs, where);
      tree(j, spec.forest.tree, where);
      break;
    case Algorithm::gbr:
      detail::allow_keys(j, where, {"n_estimators", "learning_rate", "max_depth",
                                    "min_samples_split", "min_samples_leaf"});
      detail::read(j, "n_estimators", spec.boosting.n_estimators, where);
      detail::read(j, "learning_rate", spec.boosting.learning_rate, where);
      detail::read(j, "max_depth", spec.boosting.max_depth, where);
      detail::read(j, "min_samples_split", spec.boosting.min_samples_split, where);
      detail::read(j, "min_samples_leaf", spec.boosting.min_samples_leaf, where);
      break;
  }
  spec.validate();
  return spec;
}

inline std::vector<models::Algorithm> parse_model_list(
    const std::vector<std::string>& names) {
  std::vector<models::Algorithm> out;
  for (const auto& n : names) {
    const auto a = models::parse_algorithm(n);
    if (std::find(out.begin(), out.end(), a) == out.end()) out.push_back(a);
  }
  if (out.empty()) throw ConfigError("at least one model is required");
  return out;
}

inline ExperimentConfig parse_experiment(const json& j) {
  detail::check_schema(j);
  detail::allow_keys(j, "config",
                     {"schema_version", "seed", "input", "cleaning", "sweep",
                      "models", "split", "folds", "cv_mode", "encoding",
                      "model_params", "output_dir", "jobs", "attack"});
  ExperimentConfig c;
  detail::read(j, "seed", c.seed, "config");
  c.split.seed = c.seed;
  c.fold_seed = c.seed;
  c.synth.seed = c.seed;

  if (j.contains("input")) {
    const json& in = j["input"];
    detail::allow_keys(in, "input", {"synth", "table", "raw_dir"});
    if (in.size() != 1) {
      throw ConfigError("input needs exactly one of synth, table, raw_dir");
    }
    if (in.contains("synth")) {
      c.input = InputKind::synth;
      c.synth = parse_synth(in["synth"], c.seed);
    } else if (in.contains("table")) {
      c.input = InputKind::table;
      detail::read(in, "table", c.input_path, "input");
    } else {
      c.input = InputKind::raw_dir;
      detail::read(in, "raw_dir", c.input_path, "input");
    }
  }
  if (j.contains("cleaning")) c.cleaning = parse_cleaning(j["cleaning"]);
  detail::read(j, "sweep", c.sweep, "config");
  if (c.sweep.empty()) throw ConfigError("sweep needs at least one configuration");
  if (j.contains("models")) {
    std::vector<std::string> names;
    detail::read(j, "models", names, "config");
    c.models = parse_model_list(names);
  }
  if (j.contains("split")) {
    const json& s = j["split"];
    detail::allow_keys(s, "split", {"train_fraction", "seed"});
    detail::read(s, "train_fraction", c.split.train_fraction, "split");
    detail::read(s, "seed", c.split.seed, "split");
    try {
      c.split.validate();
    } catch (const SplitError& e) {
      throw ConfigError(e.what());
    }
  }
  if (j.contains("folds")) {
    const json& f = j["folds"];
    detail::allow_keys(f, "folds", {"k", "shuffle", "seed"});
    detail::read(f, "k", c.folds, "folds");
    detail::read(f, "shuffle", c.shuffle, "folds");
    detail::read(f, "seed", c.fold_seed, "folds");
    if (c.folds < 2) throw ConfigError("folds.k must be >= 2");
  }
  if (j.contains("cv_mode")) {
    std::string mode;
    detail::read(j, "cv_mode", mode, "config");
    if (mode == "train") {
      c.cv_mode = CvMode::train;
    } else if (mode == "full") {
      c.cv_mode = CvMode::full;
    } else {
      throw ConfigError("cv_mode must be 'train' or 'full'");
    }
  }
  if (j.contains("encoding")) {
    const json& e = j["encoding"];
    detail::allow_keys(e, "encoding", {"categorical", "include_occupancy",
                                       "exclude_room", "exclude_zone"});
    std::string cat = "label";
    detail::read(e, "categorical", cat, "encoding");
    if (cat == "label") {
      c.encoding.categorical = models::CategoricalEncoding::label;
    } else if (cat == "one_hot") {
      c.encoding.categorical = models::CategoricalEncoding::one_hot;
    } else {
      throw ConfigError("encoding.categorical must be 'label' or 'one_hot'");
    }
    detail::read(e, "include_occupancy", c.encoding.include_occupancy, "encoding");
    detail::read(e, "exclude_room", c.encoding.exclude_room, "encoding");
    detail::read(e, "exclude_zone", c.encoding.exclude_zone, "encoding");
  }
  if (j.contains("model_params")) {
    const json& mp = j["model_params"];
    if (!mp.is_object()) throw ConfigError("model_params must be an object");
    for (const auto& [name, params] : mp.items()) {
      c.specs.push_back(
          parse_model_params(models::parse_algorithm(name), params, c.seed));
    }
  }
  detail::read(j, "output_dir", c.output_dir, "config");
  detail::read(j, "jobs", c.jobs, "config");
  if (c.jobs == 0) c.jobs = 1;
  return c;
}

// ---------------------------------------------------------------------------
// Attack experiments

struct AttackConfig {
  attack::Scenario scenario;
  std::vector<int> activity_levels = {4, 3, 2, 1};
  std::vector<attack::Strategy> strategies = {
      std::begin(attack::kAllStrategies), std::end(attack::kAllStrategies)};
  std::vector<std::uint64_t> seeds;
  std::string output_dir = "out";

  static std::vector<std::uint64_t> seed_range(std::uint64_t base,
                                               std::size_t count) {
    std::vector<std::uint64_t> out(count);
    for (std::size_t i = 0; i < count; ++i) out[i] = base + i;
    return out;
  }
};

/// The "attack" block of a config file.
inline AttackConfig parse_attack(const json& j, std::uint64_t default_seed = 10) {
  detail::allow_keys(j, "attack",
                     {"room", "profiles", "schedule", "noise",
                      "activity_levels", "strategies", "seeds", "seed",
                      "output_dir"});
  AttackConfig c;
  attack::Scenario& s = c.scenario;
  if (j.contains("room")) {
    const json& r = j["room"];
    detail::allow_keys(r, "room", {"volume", "ventilation_rate", "outdoor_co2",
                                   "base_emission"});
    detail::read(r, "volume", s.room.volume, "room");
    detail::read(r, "ventilation_rate", s.room.ventilation_rate, "room");
    detail::read(r, "outdoor_co2", s.room.outdoor_co2, "room");
    detail::read(r, "base_emission", s.room.base_emission, "room");
  }
  if (j.contains("profiles")) {
    const json& p = j["profiles"];
    if (!p.is_array() || p.size() != 2) {
      throw ConfigError("profiles must list exactly two occupants");
    }
    attack::OccupantProfile* targets[] = {&s.person_a, &s.person_b};
    for (std::size_t i = 0; i < 2; ++i) {
      detail::allow_keys(p[i], "profiles[]", {"name", "mass", "sex_factor"});
      detail::read(p[i], "name", targets[i]->name, "profiles[]");
      detail::read(p[i], "mass", targets[i]->mass, "profiles[]");
      detail::read(p[i], "sex_factor", targets[i]->sex_factor, "profiles[]");
    }
  }
  if (j.contains("schedule")) {
    const json& sc = j["schedule"];
    detail::allow_keys(sc, "schedule", {"probabilities", "n_readings", "n_history"});
    if (sc.contains("probabilities")) {
      std::vector<double> p;
      detail::read(sc, "probabilities", p, "schedule");
      if (p.size() != 4) throw ConfigError("schedule.probabilities needs 4 values");
      std::copy(p.begin(), p.end(), s.schedule.begin());
    }
    detail::read(sc, "n_readings", s.n_readings, "schedule");
    detail::read(sc, "n_history", s.n_history, "schedule");
  }
  if (j.contains("noise")) {
    const json& n = j["noise"];
    detail::allow_keys(n, "noise", {"sd", "gap_fraction"});
    if (n.contains("sd")) {
      double sd = 0.0;
      detail::read(n, "sd", sd, "noise");
      s.noise_sd = sd;
    }
    detail::read(n, "gap_fraction", s.noise_gap_fraction, "noise");
  }
  detail::read(j, "activity_levels", c.activity_levels, "attack");
  for (int level : c.activity_levels) (void)sita::SitaLevel(level);
  if (j.contains("strategies")) {
    std::vector<std::string> names;
    detail::read(j, "strategies", names, "attack");
    c.strategies.clear();
    for (const auto& n : names) c.strategies.push_back(attack::parse_strategy(n));
  }
  std::uint64_t base = default_seed;
  detail::read(j, "seed", base, "attack");
  std::size_t count = 100;
  detail::read(j, "seeds", count, "attack");
  c.seeds = AttackConfig::seed_range(base, count);
  detail::read(j, "output_dir", c.output_dir, "attack");
  s.validate();
  return c;
}

inline json load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace sitabench::config
