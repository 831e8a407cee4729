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


#include <gtest/gtest.h>

#include <cmath>

#include "sitabench/attack.hpp"
#include "sitabench/random.hpp"

namespace sb = sitabench;
namespace at = sitabench::attack;
using at::Hypothesis;

namespace {

/// Optimal 1-D partition into k contiguous groups of the sorted values, by
/// enumeration of all cut positions.
std::vector<std::size_t> brute_kmeans(const std::vector<double>& sorted, std::size_t k) {
  const std::size_t n = sorted.size();
  std::vector<std::size_t> cuts(k - 1), best_labels;
  double best = std::numeric_limits<double>::infinity();
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t c, std::size_t from) {
    if (c == k - 1) {
      std::vector<std::size_t> labels(n);
      double cost = 0;
      std::size_t begin = 0;
      for (std::size_t g = 0; g < k; ++g) {
        const std::size_t end = g < k - 1 ? cuts[g] : n;
        double mean = 0;
        for (std::size_t i = begin; i < end; ++i) mean += sorted[i];
        mean /= static_cast<double>(end - begin);
        for (std::size_t i = begin; i < end; ++i) {
          cost += (sorted[i] - mean) * (sorted[i] - mean);
          labels[i] = g;
        }
        begin = end;
      }
      if (cost < best) {
        best = cost;
        best_labels = labels;
      }
      return;
    }
    for (std::size_t cut = from; cut + (k - 1 - c) <= n; ++cut) {
      cuts[c] = cut;
      rec(c + 1, cut + 1);
    }
  };
  rec(0, 1);
  return best_labels;
}

at::RoomModel exact_room() {
  at::RoomModel r;
  r.outdoor_co2 = 400;
  r.base_emission = 0.125;
  r.ventilation_rate = 1.0;
  return r;
}

}  // namespace

TEST(Emission, MassProportional) {
  const at::RoomModel room;
  EXPECT_EQ(at::emission_rate({"ref", 70, 1.0}, room), room.base_emission);
  const double a = at::emission_rate({"a", 50, 1.0}, room);
  const double b = at::emission_rate({"b", 90, 1.0}, room);
  EXPECT_NEAR(a / b, 5.0 / 9.0, 1e-15);
  EXPECT_THROW(at::emission_rate({"x", 70, 0.0}, room), sb::ConfigError);
  EXPECT_THROW(at::emission_rate({"x", -1, 1.0}, room), sb::ConfigError);
}

TEST(SteadyState, ClosedForm) {
  at::RoomModel room;
  room.base_emission = 1e-4;
  room.ventilation_rate = 0.1;
  room.outdoor_co2 = 400;
  EXPECT_EQ(at::steady_state_co2(room, {}), 400.0);
  const at::OccupantProfile ref{"ref", 70, 1.0};
  EXPECT_NEAR(at::steady_state_co2(room, std::span(&ref, 1)), 1400.0, 1e-9);
  const auto a = at::default_person_a(), b = at::default_person_b();
  const at::OccupantProfile both[] = {a, b};
  const double excess_a = at::steady_state_co2(room, std::span(&a, 1)) - 400;
  const double excess_b = at::steady_state_co2(room, std::span(&b, 1)) - 400;
  EXPECT_NEAR(at::steady_state_co2(room, both), 400 + excess_a + excess_b, 1e-9);
}

TEST(SteadyState, Monotonicity) {
  sb::SplitMix64 rng(1);
  for (int i = 0; i < 500; ++i) {
    at::RoomModel room;
    room.base_emission = rng.uniform(1e-6, 1e-5);
    room.ventilation_rate = rng.uniform(0.005, 0.1);
    const at::OccupantProfile p{"p", rng.uniform(30, 120), rng.uniform(0.5, 1.5)};
    at::OccupantProfile heavier = p;
    heavier.mass += 5;
    const double base = at::steady_state_co2(room, std::span(&p, 1));
    EXPECT_GT(at::steady_state_co2(room, std::span(&heavier, 1)), base);
    const at::OccupantProfile two[] = {p, p};
    EXPECT_GT(at::steady_state_co2(room, two), base);
    at::RoomModel more_air = room;
    more_air.ventilation_rate *= 1.5;
    EXPECT_LT(at::steady_state_co2(more_air, std::span(&p, 1)), base);
    at::RoomModel more_emission = room;
    more_emission.base_emission *= 1.5;
    EXPECT_GT(at::steady_state_co2(more_emission, std::span(&p, 1)), base);
  }
}

TEST(Classify, ExactReadingsAndTies) {
  const auto room = exact_room();
  const at::OccupantProfile a{"a", 70, 1.0}, b{"b", 140, 1.0};
  const auto pred = at::predictions(room, a, b);
  EXPECT_EQ(pred[1], 125400.0);
  EXPECT_EQ(at::classify(400, room, a, b), Hypothesis::empty);
  EXPECT_EQ(at::classify(pred[3], room, a, b), Hypothesis::both);
  EXPECT_EQ(at::classify((pred[0] + pred[1]) / 2, room, a, b), Hypothesis::empty);
  EXPECT_EQ(at::classify((pred[1] + pred[2]) / 2, room, a, b), Hypothesis::person_a);
}

TEST(Classify, InvertsPredictionsOverGrid) {
  for (double q : {0.005, 0.02, 0.04, 0.1}) {
    for (double ma = 40; ma <= 120; ma += 10) {
      for (double mb = 45; mb <= 125; mb += 10) {
        at::RoomModel room;
        room.ventilation_rate = q;
        const at::OccupantProfile a{"a", ma, 0.9}, b{"b", mb, 1.1};
        const auto pred = at::predictions(room, a, b);
        if (at::smallest_gap(pred) <= 0) continue;
        for (Hypothesis h : at::kAllHypotheses) {
          EXPECT_EQ(at::classify(pred[static_cast<std::size_t>(h)], room, a, b), h);
        }
      }
    }
  }
}

TEST(KMeans, MatchesBruteForceOnSeparatedLevels) {
  sb::SplitMix64 rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 8 + rng.below(13);
    std::vector<double> values;
    std::vector<int> level_of;
    const double levels[] = {400, 480, 560, 640};
    for (std::size_t i = 0; i < n; ++i) {
      const int l = i < 4 ? static_cast<int>(i) : static_cast<int>(rng.below(4));
      values.push_back(levels[l] + rng.normal(0, 2));
      level_of.push_back(l);
    }
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const auto oracle = brute_kmeans(sorted, 4);
    const auto c = at::kmeans_1d(values, 4, trial);
    for (std::size_t i = 0; i < n; ++i) {
      const auto pos = static_cast<std::size_t>(
          std::lower_bound(sorted.begin(), sorted.end(), values[i]) - sorted.begin());
      EXPECT_EQ(c.labels[i], oracle[pos]);
      EXPECT_EQ(c.labels[i], static_cast<std::size_t>(level_of[i]));
    }
    EXPECT_TRUE(std::is_sorted(c.centroids.begin(), c.centroids.end()));
  }
}

TEST(KMeans, EdgeCases) {
  const std::vector<double> same(10, 500.0);
  EXPECT_THROW(at::kmeans_1d(same, 4, 1), sb::ClusteringError);
  EXPECT_THROW(at::kmeans_1d(same, 0, 1), sb::ClusteringError);
  const std::vector<double> v = {1, 2, 3, 50, 51};
  const auto one = at::kmeans_1d(v, 1, 1);
  for (auto l : one.labels) EXPECT_EQ(l, 0u);
  EXPECT_DOUBLE_EQ(one.centroids[0], 107.0 / 5);
  EXPECT_EQ(at::kmeans_1d(v, 2, 7).labels, at::kmeans_1d(v, 2, 7).labels);
  EXPECT_EQ(at::kmeans_1d(v, 2, 7).labels,
            (std::vector<std::size_t>{0, 0, 0, 1, 1}));
}

TEST(Accuracy, OracleAndNoiselessPhysics) {
  at::Scenario s;
  s.noise_sd = 0.0;
  sb::SplitMix64 rng(3);
  const auto obs = at::simulate(s, 400, rng);
  const at::Classifier truth = [&](std::span<const double> r) {
    std::vector<Hypothesis> out;
    for (std::size_t i = 0; i < r.size(); ++i) out.push_back(obs[i].truth);
    return out;
  };
  EXPECT_EQ(at::attack_accuracy(obs, truth), 1.0);
  EXPECT_EQ(at::attack_accuracy(obs, at::physics_classifier(s)), 1.0);
  EXPECT_THROW(at::attack_accuracy({}, truth), sb::Error);
}

TEST(Accuracy, RoundingNeverHelpsOnAverage) {
  at::Scenario s;
  double level4 = 0, level2 = 0, level1 = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    sb::SplitMix64 rng(seed);
    const auto obs = at::simulate(s, s.n_readings, rng);
    const auto physics = at::physics_classifier(s);
    const double a4 = at::attack_accuracy(obs, physics);
    const double a1 =
        at::attack_accuracy(at::degrade(obs, sb::sita::SitaLevel(1)), physics);
    EXPECT_LE(a1, a4) << "seed " << seed;
    level4 += a4;
    level2 += at::attack_accuracy(at::degrade(obs, sb::sita::SitaLevel(2)), physics);
    level1 += a1;
  }
  EXPECT_GE(level4, level2);
  EXPECT_GE(level2, level1);
}

TEST(Scenario, DefaultsAreDistinguishable) {
  const at::Scenario s;
  const auto pred = at::predictions(s.room, s.person_a, s.person_b);
  EXPECT_EQ(pred[0], 400.0);
  EXPECT_TRUE(std::is_sorted(pred.begin(), pred.end()));
  EXPECT_GT(at::smallest_gap(pred), 50.0);
  EXPECT_NEAR(s.noise(), 0.05 * at::smallest_gap(pred), 1e-12);
}

TEST(RunAttack, StrategiesAndLevels) {
  at::Scenario s;
  const int levels[] = {4, 2, 1, 0};
  const std::uint64_t seeds[] = {1, 2, 3};
  const auto results = at::run_attack(s, levels, at::kAllStrategies, seeds);
  ASSERT_EQ(results.size(), 3u * 4 * 3);
  for (const auto& r : results) {
    EXPECT_GE(r.accuracy, 0.0);
    EXPECT_LE(r.accuracy, 1.0);
    if (r.activity_level == 4) {
      EXPECT_GE(r.accuracy, 0.9) << at::to_string(r.strategy);
    }
  }
  EXPECT_EQ(results, at::run_attack(s, levels, at::kAllStrategies, seeds));
  const auto summary = at::summarize(results);
  ASSERT_EQ(summary.size(), 12u);
  EXPECT_EQ(summary[0].seeds, 3u);
  EXPECT_EQ(at::attack_row(results[0]).size(), at::attack_header().size());
}

TEST(RunAttack, ParseStrategy) {
  EXPECT_EQ(at::parse_strategy("kmeans"), at::Strategy::kmeans);
  EXPECT_THROW(at::parse_strategy("guess"), sb::ConfigError);
}
