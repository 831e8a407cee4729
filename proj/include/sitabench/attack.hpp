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

// Occupancy inference from CO2 readings.
//
// An observer who knows the two regular occupants of a small room and their
// approximate body mass predicts the equilibrium concentration for each
// occupancy hypothesis from a well-mixed mass balance,
//
//   C = C_out + 1e6 * sum(G_i) / Q,   G_i = G_ref * (mass_i / 70) * factor_i,
//
// and labels each reading with the nearest prediction. Two data-driven
// variants need no physics: 1-D k-means over a history of readings, and a
// regression tree trained on labelled history. Readings can be passed
// through the SITA activity transform first to measure how much a privacy
// level degrades the attack.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iterator>
#include <limits>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sitabench/error.hpp"
#include "sitabench/models/model.hpp"
#include "sitabench/random.hpp"
#include "sitabench/sita.hpp"

namespace sitabench::attack {

inline constexpr double kReferenceMass = 70.0;  // kg

struct OccupantProfile {
  std::string name;
  double mass = kReferenceMass;  // kg
  double sex_factor = 1.0;

  void validate() const {
    if (!(mass > 0.0) || !std::isfinite(mass)) {
      throw ConfigError("occupant " + name + ": mass must be > 0");
    }
    if (!(sex_factor > 0.0) || !std::isfinite(sex_factor)) {
      throw ConfigError("occupant " + name + ": sex_factor must be > 0");
    }
  }
};

struct RoomModel {
  double volume = 30.0;             // m^3
  double ventilation_rate = 0.04;   // Q, m^3/s
  double outdoor_co2 = 400.0;       // ppm
  double base_emission = 5.0e-6;    // m^3/s for a 70 kg reference occupant

  void validate() const {
    for (double v : {volume, ventilation_rate, outdoor_co2, base_emission}) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw ConfigError("room model parameters must be finite and > 0");
      }
    }
  }
};

inline OccupantProfile default_person_a() { return {"Alice", 50.0, 0.9}; }
inline OccupantProfile default_person_b() { return {"Bob", 90.0, 1.0}; }

enum class Hypothesis { empty = 0, person_a = 1, person_b = 2, both = 3 };

inline constexpr std::array<Hypothesis, 4> kAllHypotheses = {
    Hypothesis::empty, Hypothesis::person_a, Hypothesis::person_b,
    Hypothesis::both};

inline std::string_view to_string(Hypothesis h) {
  switch (h) {
    case Hypothesis::empty: return "empty";
    case Hypothesis::person_a: return "person_a";
    case Hypothesis::person_b: return "person_b";
    case Hypothesis::both: return "both";
  }
  return "unknown";
}

/// CO2 generation in m^3/s, proportional to body mass.
inline double emission_rate(const OccupantProfile& p, const RoomModel& room) {
  p.validate();
  return room.base_emission * (p.mass / kReferenceMass) * p.sex_factor;
}

inline double steady_state_co2(const RoomModel& room,
                               std::span<const OccupantProfile> occupants) {
  room.validate();
  double generation = 0.0;
  for (const auto& p : occupants) generation += emission_rate(p, room);
  return room.outdoor_co2 + 1e6 * generation / room.ventilation_rate;
}

inline double predicted_co2(Hypothesis h, const RoomModel& room,
                            const OccupantProfile& a,
                            const OccupantProfile& b) {
  switch (h) {
    case Hypothesis::empty: return steady_state_co2(room, {});
    case Hypothesis::person_a: return steady_state_co2(room, std::span(&a, 1));
    case Hypothesis::person_b: return steady_state_co2(room, std::span(&b, 1));
    case Hypothesis::both: {
      const OccupantProfile pair[] = {a, b};
      return steady_state_co2(room, pair);
    }
  }
  return room.outdoor_co2;
}

/// Predictions for every hypothesis, indexed by the enum value.
inline std::array<double, 4> predictions(const RoomModel& room,
                                         const OccupantProfile& a,
                                         const OccupantProfile& b) {
  std::array<double, 4> out{};
  for (Hypothesis h : kAllHypotheses) {
    out[static_cast<std::size_t>(h)] = predicted_co2(h, room, a, b);
  }
  return out;
}

/// Smallest distance between two hypothesis predictions.
inline double smallest_gap(const std::array<double, 4>& pred) {
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pred.size(); ++i) {
    for (std::size_t j = i + 1; j < pred.size(); ++j) {
      gap = std::min(gap, std::abs(pred[i] - pred[j]));
    }
  }
  return gap;
}

/// Nearest prediction; equal distances go to the hypothesis with fewer
/// occupants (enum order).
inline Hypothesis nearest_hypothesis(double reading,
                                     const std::array<double, 4>& pred) {
  Hypothesis best = Hypothesis::empty;
  double best_distance = std::numeric_limits<double>::infinity();
  for (Hypothesis h : kAllHypotheses) {
    const double d = std::abs(reading - pred[static_cast<std::size_t>(h)]);
    if (d < best_distance) {
      best = h;
      best_distance = d;
    }
  }
  return best;
}

inline Hypothesis classify(double reading, const RoomModel& room,
                           const OccupantProfile& a, const OccupantProfile& b) {
  return nearest_hypothesis(reading, predictions(room, a, b));
}

// ---------------------------------------------------------------------------
// 1-D k-means

struct Clustering {
  std::vector<std::size_t> labels;  // 0 = lowest centroid
  std::vector<double> centroids;    // ascending
  double inertia = 0.0;
};

/// Lloyd's algorithm seeded with k-means++, deterministic in `seed`.
/// Cluster ids are ordered by ascending centroid.
inline Clustering kmeans_1d(std::span<const double> values, std::size_t k,
                            std::uint64_t seed, std::size_t max_iter = 300) {
  if (k == 0) throw ClusteringError("k must be >= 1");
  const std::set<double> distinct(values.begin(), values.end());
  if (distinct.size() < k) {
    throw ClusteringError("need at least " + std::to_string(k) +
                          " distinct readings, got " +
                          std::to_string(distinct.size()));
  }
  const std::size_t n = values.size();
  SplitMix64 rng(seed);

  std::vector<double> centers;
  centers.push_back(values[rng.below(n)]);
  std::vector<double> d2(n);
  while (centers.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (double c : centers) best = std::min(best, (values[i] - c) * (values[i] - c));
      d2[i] = best;
      total += best;
    }
    // total > 0: fewer centers than distinct values.
    double target = rng.uniform() * total;
    std::size_t pick = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
      if (d2[i] <= 0.0) continue;
      target -= d2[i];
      if (target < 0.0) {
        pick = i;
        break;
      }
    }
    while (d2[pick] <= 0.0) pick = (pick + n - 1) % n;
    centers.push_back(values[pick]);
  }
  std::sort(centers.begin(), centers.end());

  std::vector<std::size_t> labels(n, 0);
  auto assign = [&] {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_d = std::abs(values[i] - centers[0]);
      for (std::size_t c = 1; c < k; ++c) {
        const double d = std::abs(values[i] - centers[c]);
        if (d < best_d) {
          best = c;
          best_d = d;
        }
      }
      if (labels[i] != best) changed = true;
      labels[i] = best;
    }
    return changed;
  };
  assign();
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    std::vector<double> sum(k, 0.0);
    std::vector<std::size_t> count(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sum[labels[i]] += values[i];
      ++count[labels[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (count[c] > 0) {
        centers[c] = sum[c] / static_cast<double>(count[c]);
        continue;
      }
      // Empty cluster: move it to the point farthest from its center.
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = std::abs(values[i] - centers[labels[i]]);
        if (d > far_d) {
          far = i;
          far_d = d;
        }
      }
      centers[c] = values[far];
    }
    if (!assign()) break;
  }

  // Relabel by ascending centroid.
  std::vector<std::size_t> rank(k);
  std::iota(rank.begin(), rank.end(), std::size_t{0});
  std::sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) {
    return centers[a] < centers[b] || (centers[a] == centers[b] && a < b);
  });
  std::vector<std::size_t> new_id(k);
  for (std::size_t r = 0; r < k; ++r) new_id[rank[r]] = r;
  Clustering out;
  out.labels.resize(n);
  out.centroids.resize(k);
  for (std::size_t c = 0; c < k; ++c) out.centroids[new_id[c]] = centers[c];
  for (std::size_t i = 0; i < n; ++i) {
    out.labels[i] = new_id[labels[i]];
    const double e = values[i] - out.centroids[out.labels[i]];
    out.inertia += e * e;
  }
  return out;
}

inline std::vector<std::size_t> classify_unsupervised(
    std::span<const double> readings, std::size_t k = 4,
    std::uint64_t seed = 10) {
  return kmeans_1d(readings, k, seed).labels;
}

// ---------------------------------------------------------------------------
// Simulation and accuracy

struct Observation {
  double reading = 0.0;
  Hypothesis truth = Hypothesis::empty;
};

using Classifier =
    std::function<std::vector<Hypothesis>(std::span<const double> readings)>;

/// Fraction of observations whose classified hypothesis equals the truth.
inline double attack_accuracy(std::span<const Observation> simulated,
                              const Classifier& strategy) {
  if (simulated.empty()) throw Error("attack_accuracy needs observations");
  std::vector<double> readings;
  readings.reserve(simulated.size());
  for (const auto& o : simulated) readings.push_back(o.reading);
  const std::vector<Hypothesis> guess = strategy(readings);
  if (guess.size() != simulated.size()) {
    throw Error("classifier returned the wrong number of labels");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < simulated.size(); ++i) {
    if (guess[i] == simulated[i].truth) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(simulated.size());
}

enum class Strategy { physics, kmeans, supervised };

inline constexpr Strategy kAllStrategies[] = {Strategy::physics,
                                              Strategy::kmeans,
                                              Strategy::supervised};

inline std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::physics: return "physics";
    case Strategy::kmeans: return "kmeans";
    case Strategy::supervised: return "supervised";
  }
  return "unknown";
}

inline Strategy parse_strategy(std::string_view name) {
  for (Strategy s : kAllStrategies) {
    if (to_string(s) == name) return s;
  }
  throw ConfigError("unknown attack strategy '" + std::string(name) + "'");
}

struct Scenario {
  RoomModel room;
  OccupantProfile person_a = default_person_a();
  OccupantProfile person_b = default_person_b();
  // Probability of each hypothesis at a reading, in enum order.
  std::array<double, 4> schedule = {0.25, 0.25, 0.25, 0.25};
  std::size_t n_readings = 200;
  std::size_t n_history = 200;  // labelled history for the supervised variant
  std::optional<double> noise_sd;  // ppm; overrides noise_gap_fraction
  double noise_gap_fraction = 0.05;

  void validate() const {
    room.validate();
    person_a.validate();
    person_b.validate();
    double total = 0.0;
    for (double p : schedule) {
      if (!(p >= 0.0)) throw ConfigError("schedule probabilities must be >= 0");
      total += p;
    }
    if (!(total > 0.0)) throw ConfigError("schedule probabilities sum to 0");
    if (n_readings == 0) throw ConfigError("n_readings must be > 0");
    if (noise_sd && !(*noise_sd >= 0.0)) throw ConfigError("noise sd must be >= 0");
    if (!(noise_gap_fraction >= 0.0)) {
      throw ConfigError("noise_gap_fraction must be >= 0");
    }
  }

  double noise() const {
    if (noise_sd) return *noise_sd;
    return noise_gap_fraction *
           smallest_gap(predictions(room, person_a, person_b));
  }
};

/// Steady-state readings plus Gaussian noise, hypotheses drawn from the
/// schedule.
inline std::vector<Observation> simulate(const Scenario& s, std::size_t count,
                                         SplitMix64& rng) {
  s.validate();
  const auto pred = predictions(s.room, s.person_a, s.person_b);
  const double sd = s.noise();
  double total = 0.0;
  for (double p : s.schedule) total += p;
  std::vector<Observation> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    double u = rng.uniform() * total;
    std::size_t h = 0;
    while (h < 3 && u >= s.schedule[h]) {
      u -= s.schedule[h];
      ++h;
    }
    while (s.schedule[h] == 0.0) h = (h + 3) % 4;
    out.push_back({pred[h] + sd * rng.normal(), static_cast<Hypothesis>(h)});
  }
  return out;
}

/// Applies the SITA activity transform to a reading; nullopt at level 0.
inline std::optional<double> released_reading(double reading,
                                              sita::SitaLevel level) {
  if (level.value() == 0) return std::nullopt;
  return sita::generalize_activity_value(reading, level);
}

inline std::vector<Observation> degrade(std::span<const Observation> obs,
                                        sita::SitaLevel level,
                                        std::vector<bool>* deleted = nullptr) {
  std::vector<Observation> out(obs.begin(), obs.end());
  if (deleted) deleted->assign(obs.size(), level.value() == 0);
  for (auto& o : out) {
    o.reading = released_reading(o.reading, level).value_or(0.0);
  }
  return out;
}

/// Hypotheses sorted by their predicted concentration.
inline std::array<Hypothesis, 4> hypotheses_by_level(
    const std::array<double, 4>& pred) {
  std::array<Hypothesis, 4> order = kAllHypotheses;
  std::stable_sort(order.begin(), order.end(), [&](Hypothesis a, Hypothesis b) {
    return pred[static_cast<std::size_t>(a)] < pred[static_cast<std::size_t>(b)];
  });
  return order;
}

inline Classifier physics_classifier(const Scenario& s) {
  const auto pred = predictions(s.room, s.person_a, s.person_b);
  return [pred](std::span<const double> readings) {
    std::vector<Hypothesis> out;
    out.reserve(readings.size());
    for (double r : readings) out.push_back(nearest_hypothesis(r, pred));
    return out;
  };
}

/// Clusters the readings into four groups mapped to hypotheses by ascending
/// CO2. When generalization leaves fewer than four distinct values, the
/// readings are clustered into that many groups and each group takes the
/// hypothesis nearest its centroid.
inline Classifier kmeans_classifier(const Scenario& s, std::uint64_t seed) {
  const auto pred = predictions(s.room, s.person_a, s.person_b);
  return [pred, seed](std::span<const double> readings) {
    const std::set<double> distinct(readings.begin(), readings.end());
    std::vector<Hypothesis> out(readings.size(), Hypothesis::empty);
    if (distinct.size() >= 4) {
      const auto order = hypotheses_by_level(pred);
      const auto labels = classify_unsupervised(readings, 4, seed);
      for (std::size_t i = 0; i < readings.size(); ++i) out[i] = order[labels[i]];
      return out;
    }
    const Clustering c = kmeans_1d(readings, distinct.size(), seed);
    for (std::size_t i = 0; i < readings.size(); ++i) {
      out[i] = nearest_hypothesis(c.centroids[c.labels[i]], pred);
    }
    return out;
  };
}

/// A regression tree on labelled history (reading -> hypothesis index),
/// predictions rounded to the nearest hypothesis.
inline Classifier supervised_classifier(std::span<const Observation> history,
                                        std::uint64_t seed) {
  models::FeatureMatrix X(history.size(), {"co2"});
  models::TargetVector y(history.size());
  for (std::size_t i = 0; i < history.size(); ++i) {
    X.at(i, 0) = history[i].reading;
    y[i] = static_cast<double>(history[i].truth);
  }
  auto model = models::fit(models::ModelSpec::defaults(models::Algorithm::dtr, seed),
                           X, y);
  return [model = std::move(model)](std::span<const double> readings) {
    std::vector<Hypothesis> out;
    out.reserve(readings.size());
    for (double r : readings) {
      const double v = model.predict_row(std::span<const double>(&r, 1));
      const auto h = static_cast<int>(std::clamp(std::round(v), 0.0, 3.0));
      out.push_back(static_cast<Hypothesis>(h));
    }
    return out;
  };
}

/// Accuracy of one strategy on a draw released at `level`. With the
/// activity dimension deleted the attacker can only guess `empty`.
inline double run_strategy(const Scenario& s, Strategy strategy,
                           sita::SitaLevel level,
                           std::span<const Observation> observations,
                           std::span<const Observation> history,
                           std::uint64_t seed) {
  if (level.value() == 0) {
    return attack_accuracy(observations, [](std::span<const double> r) {
      return std::vector<Hypothesis>(r.size(), Hypothesis::empty);
    });
  }
  const auto released = degrade(observations, level);
  switch (strategy) {
    case Strategy::physics:
      return attack_accuracy(released, physics_classifier(s));
    case Strategy::kmeans:
      return attack_accuracy(released, kmeans_classifier(s, seed));
    case Strategy::supervised: {
      const auto released_history = degrade(history, level);
      if (released_history.size() < 2) {
        throw ConfigError("supervised attack needs >= 2 history readings");
      }
      return attack_accuracy(released, supervised_classifier(released_history, seed));
    }
  }
  return 0.0;
}

struct AttackResult {
  int activity_level = 4;
  Strategy strategy = Strategy::physics;
  std::uint64_t seed = 0;
  double accuracy = 0.0;

  friend bool operator==(const AttackResult&, const AttackResult&) = default;
};

/// Every (level, strategy) pair is scored on the same draw per seed.
inline std::vector<AttackResult> run_attack(const Scenario& s,
                                            std::span<const int> levels,
                                            std::span<const Strategy> strategies,
                                            std::span<const std::uint64_t> seeds) {
  s.validate();
  std::vector<AttackResult> out;
  for (std::uint64_t seed : seeds) {
    SplitMix64 rng = SplitMix64::stream(seed, 0);
    const auto observations = simulate(s, s.n_readings, rng);
    SplitMix64 history_rng = SplitMix64::stream(seed, 1);
    const auto history = simulate(s, s.n_history, history_rng);
    for (int level : levels) {
      for (Strategy strategy : strategies) {
        out.push_back({level, strategy, seed,
                       run_strategy(s, strategy, sita::SitaLevel(level),
                                    observations, history, seed)});
      }
    }
  }
  return out;
}

inline csv::Row attack_header() {
  return {"activity_level", "strategy", "seed", "accuracy"};
}

inline csv::Row attack_row(const AttackResult& r) {
  return {std::to_string(r.activity_level), std::string(to_string(r.strategy)),
          std::to_string(r.seed), format_number(r.accuracy)};
}

struct AttackSummary {
  int activity_level = 4;
  Strategy strategy = Strategy::physics;
  std::size_t seeds = 0;
  double mean_accuracy = 0.0;
  double min_accuracy = 0.0;
};

/// Per (level, strategy) aggregate, in first-appearance order.
inline std::vector<AttackSummary> summarize(std::span<const AttackResult> results) {
  std::vector<AttackSummary> out;
  for (const AttackResult& r : results) {
    auto it = std::find_if(out.begin(), out.end(), [&](const AttackSummary& s) {
      return s.activity_level == r.activity_level && s.strategy == r.strategy;
    });
    if (it == out.end()) {
      out.push_back({r.activity_level, r.strategy, 0, 0.0, r.accuracy});
      it = std::prev(out.end());
    }
    ++it->seeds;
    it->mean_accuracy += r.accuracy;
    it->min_accuracy = std::min(it->min_accuracy, r.accuracy);
  }
  for (auto& s : out) s.mean_accuracy /= static_cast<double>(s.seeds);
  return out;
}

inline csv::Row summary_header() {
  return {"activity_level", "strategy", "seeds", "mean_accuracy", "min_accuracy"};
}

inline csv::Row summary_row(const AttackSummary& s) {
  return {std::to_string(s.activity_level), std::string(to_string(s.strategy)),
          std::to_string(s.seeds), format_number(s.mean_accuracy),
          format_number(s.min_accuracy)};
}

}  // namespace sitabench::attack
