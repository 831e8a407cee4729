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
#include <functional>

#include "sitabench/models/encode.hpp"
#include "sitabench/models/model.hpp"
#include "sitabench/random.hpp"
#include "sitabench/sita.hpp"

namespace sb = sitabench;
namespace m = sitabench::models;

namespace {

m::FeatureMatrix random_matrix(std::size_t n, std::size_t p, sb::SplitMix64& rng) {
  std::vector<std::vector<double>> rows(n, std::vector<double>(p));
  for (auto& r : rows) {
    for (auto& v : r) v = rng.uniform(-5, 5);
  }
  return m::FeatureMatrix::from_rows(rows);
}

/// Exhaustive CART: at each node try every feature and every midpoint
/// between consecutive distinct values, keep the split with the smallest
/// summed child SSE.
struct BruteTree {
  struct Node {
    bool leaf = true;
    std::size_t feature = 0;
    double threshold = 0;
    double value = 0;
    std::unique_ptr<Node> left, right;
  };

  static double sse(const std::vector<double>& ys) {
    double mean = 0;
    for (double v : ys) mean += v;
    mean /= static_cast<double>(ys.size());
    double s = 0;
    for (double v : ys) s += (v - mean) * (v - mean);
    return s;
  }

  static std::unique_ptr<Node> grow(const m::FeatureMatrix& X,
                                    const std::vector<double>& y,
                                    const std::vector<std::size_t>& rows,
                                    int depth_left = -1) {
    auto node = std::make_unique<Node>();
    std::vector<double> ys;
    for (auto r : rows) ys.push_back(y[r]);
    for (double v : ys) node->value += v;
    node->value /= static_cast<double>(ys.size());
    if (rows.size() < 2 || sse(ys) == 0 || depth_left == 0) return node;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < X.cols; ++j) {
      std::vector<double> xs;
      for (auto r : rows) xs.push_back(X.at(r, j));
      std::sort(xs.begin(), xs.end());
      xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
      for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
        const double t = (xs[k] + xs[k + 1]) / 2;
        std::vector<double> l, r;
        for (auto row : rows) (X.at(row, j) <= t ? l : r).push_back(y[row]);
        const double s = sse(l) + sse(r);
        if (s < best - 1e-12) {
          best = s;
          node->leaf = false;
          node->feature = j;
          node->threshold = t;
        }
      }
    }
    if (node->leaf) return node;
    std::vector<std::size_t> l, r;
    for (auto row : rows) (X.at(row, node->feature) <= node->threshold ? l : r).push_back(row);
    node->left = grow(X, y, l, depth_left - 1);
    node->right = grow(X, y, r, depth_left - 1);
    return node;
  }

  static double predict(const Node& n, std::span<const double> x) {
    if (n.leaf) return n.value;
    return predict(x[n.feature] <= n.threshold ? *n.left : *n.right, x);
  }
};

/// Ridge coefficients from the centred normal equations by Gaussian
/// elimination with partial pivoting.
std::vector<double> ridge_oracle(const m::FeatureMatrix& X, const std::vector<double>& y,
                                 double alpha, double* intercept) {
  const std::size_t n = X.rows, p = X.cols;
  std::vector<double> xm(p, 0), w(p, 0);
  double ym = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ym += y[i] / n;
    for (std::size_t j = 0; j < p; ++j) xm[j] += X.at(i, j) / n;
  }
  std::vector<std::vector<double>> a(p, std::vector<double>(p + 1, 0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      for (std::size_t k = 0; k < p; ++k) {
        a[j][k] += (X.at(i, j) - xm[j]) * (X.at(i, k) - xm[k]);
      }
      a[j][p] += (X.at(i, j) - xm[j]) * (y[i] - ym);
    }
  }
  for (std::size_t j = 0; j < p; ++j) a[j][j] += alpha;
  for (std::size_t c = 0; c < p; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < p; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    }
    std::swap(a[c], a[piv]);
    for (std::size_t r = 0; r < p; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k <= p; ++k) a[r][k] -= f * a[c][k];
    }
  }
  for (std::size_t j = 0; j < p; ++j) w[j] = a[j][p] / a[j][j];
  *intercept = ym;
  for (std::size_t j = 0; j < p; ++j) *intercept -= w[j] * xm[j];
  return w;
}

m::ModelSpec spec(m::Algorithm a) { return m::ModelSpec::defaults(a, 10); }

sb::SensorRecord sensor(const char* room, const char* zone, const char* ts, double co2) {
  sb::SensorRecord r;
  r.room = room;
  r.zone = zone;
  r.timestamp = sb::parse_timestamp(ts);
  r.co2 = co2;
  r.temperature = 21.5;
  r.humidity = 40;
  r.brightness = 300;
  r.occupancy = 2;
  return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// Encoding

TEST(Encode, LabelCodesReserveZeroForDeleted) {
  const std::vector<sb::SensorRecord> rs = {
      sensor("G.024", "2", "20181011141735", 500),
      sensor("1.017", "1", "20181012080000", 600)};
  const auto enc = m::encode(sb::sita::apply_dataset(rs, sb::sita::parse_config("4444")));
  const std::vector<std::string> names = {"room",   "zone",   "year",   "month",
                                          "day",    "hour",   "minute", "second",
                                          "temperature", "humidity", "brightness"};
  EXPECT_EQ(enc.X.names, names);
  EXPECT_EQ(enc.y, (std::vector<double>{500, 600}));
  EXPECT_EQ(enc.X.at(0, 0), 2.0);  // "G.024" sorts after "1.017"
  EXPECT_EQ(enc.X.at(1, 0), 1.0);
  EXPECT_EQ(enc.X.at(0, 2), 2018.0);
  EXPECT_EQ(enc.X.at(0, 5), 14.0);
  EXPECT_EQ(enc.X.at(0, 7), 35.0);
  EXPECT_EQ(enc.map.decode("room", 0), "deleted");
  EXPECT_EQ(enc.map.decode("room", 2), "G.024");
}

TEST(Encode, DeletedColumnsAreDropped) {
  const std::vector<sb::SensorRecord> rs = {sensor("G.024", "2", "20181011141735", 500),
                                            sensor("1.017", "1", "20181012080000", 600)};
  const auto enc = m::encode(sb::sita::apply_dataset(rs, sb::sita::parse_config("3424")));
  const std::vector<std::string> names = {"room", "year", "month", "day",
                                          "temperature", "humidity", "brightness"};
  EXPECT_EQ(enc.X.names, names);
  const auto none = m::encode(sb::sita::apply_dataset(rs, sb::sita::parse_config("0404")));
  EXPECT_EQ(none.X.names,
            (std::vector<std::string>{"temperature", "humidity", "brightness"}));
}

TEST(Encode, TargetDeletedThrows) {
  const std::vector<sb::SensorRecord> rs = {sensor("G.024", "2", "20181011141735", 500)};
  EXPECT_THROW(m::encode(sb::sita::apply_dataset(rs, sb::sita::parse_config("4440"))),
               sb::TargetMissingError);
}

TEST(Encode, OneHotAndOccupancyFlag) {
  const std::vector<sb::SensorRecord> rs = {sensor("G.024", "2", "20181011141735", 500),
                                            sensor("1.017", "1", "20181012080000", 600)};
  m::EncodePolicy policy;
  policy.categorical = m::CategoricalEncoding::one_hot;
  policy.include_occupancy = true;
  policy.exclude_zone = true;
  const auto enc =
      m::encode(sb::sita::apply_dataset(rs, sb::sita::parse_config("4444")), policy);
  EXPECT_EQ(enc.X.names.front(), "room=1.017");
  EXPECT_EQ(enc.X.names[1], "room=G.024");
  EXPECT_EQ(enc.X.names.back(), "occupancy");
  EXPECT_EQ(enc.X.at(0, 0), 0.0);
  EXPECT_EQ(enc.X.at(0, 1), 1.0);
  EXPECT_EQ(enc.X.at(1, enc.X.cols - 1), 2.0);
}

TEST(Encode, UnseenCategoryThrows) {
  m::EncodingMap map;
  map.add_column("room", {"A", "B"});
  EXPECT_EQ(map.code("room", "B"), 2);
  EXPECT_EQ(map.code("room", "deleted"), 0);
  EXPECT_THROW(map.code("room", "C"), sb::EncodeError);
}

// ---------------------------------------------------------------------------
// Linear models

TEST(Linear, RecoversPlantedCoefficients) {
  sb::SplitMix64 rng(1);
  const auto X = random_matrix(200, 5, rng);
  const std::vector<double> w = {1.5, -2.0, 0.25, 3.0, -0.75};
  std::vector<double> y(200);
  for (std::size_t i = 0; i < 200; ++i) {
    y[i] = 4.0;
    for (std::size_t j = 0; j < 5; ++j) y[i] += w[j] * X.at(i, j);
  }
  const auto model = m::fit_linear(X, y, 0.0);
  for (std::size_t j = 0; j < 5; ++j) EXPECT_NEAR(model.coefficients[j], w[j], 1e-6);
  EXPECT_NEAR(model.intercept, 4.0, 1e-6);
  EXPECT_FALSE(model.min_norm_fallback);
}

TEST(Linear, RidgeMatchesNormalEquations) {
  sb::SplitMix64 rng(2);
  const auto X = random_matrix(60, 4, rng);
  std::vector<double> y(60);
  for (auto& v : y) v = rng.normal(0, 3);
  for (double alpha : {0.0, 0.1, 1.0, 25.0}) {
    double b0 = 0;
    const auto w = ridge_oracle(X, y, alpha, &b0);
    const auto model = m::fit_linear(X, y, alpha);
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(model.coefficients[j], w[j], 1e-9);
    EXPECT_NEAR(model.intercept, b0, 1e-9);
  }
}

TEST(Linear, RidgeApproachesLeastSquares) {
  sb::SplitMix64 rng(3);
  const auto X = random_matrix(100, 6, rng);
  std::vector<double> y(100);
  for (auto& v : y) v = rng.normal(0, 1);
  const auto lr = m::fit_linear(X, y, 0.0);
  const auto rr = m::fit_linear(X, y, 1e-8);
  for (std::size_t j = 0; j < 6; ++j) {
    EXPECT_LT(std::abs(lr.coefficients[j] - rr.coefficients[j]), 1e-4);
  }
}

TEST(Linear, RankDeficientFallsBackToMinimumNorm) {
  std::vector<std::vector<double>> rows;
  std::vector<double> y;
  for (int i = 0; i < 20; ++i) {
    rows.push_back({double(i), 2.0 * i});
    y.push_back(3.0 * i + 1);
  }
  const auto model = m::fit_linear(m::FeatureMatrix::from_rows(rows), y, 0.0);
  EXPECT_TRUE(model.min_norm_fallback);
  // Minimum-norm solution of a + 2b = 3.
  EXPECT_NEAR(model.coefficients[0], 0.6, 1e-9);
  EXPECT_NEAR(model.coefficients[1], 1.2, 1e-9);
  EXPECT_NEAR(model.intercept, 1.0, 1e-9);
}

// ---------------------------------------------------------------------------
// Trees

TEST(Tree, MatchesBruteForceOnFourPoints) {
  const auto X = m::FeatureMatrix::from_rows({{1, 5}, {2, 3}, {3, 8}, {4, 1}});
  const std::vector<double> y = {1.0, 2.0, 10.0, 11.0};
  const auto model = m::fit(spec(m::Algorithm::dtr), X, y);
  const auto& tree = std::get<m::RegressionTree>(model.state);
  // First split separates {1,2} from {10,11} on feature 0 at 2.5.
  EXPECT_EQ(tree.feature[0], 0);
  EXPECT_DOUBLE_EQ(tree.threshold[0], 2.5);
  std::vector<std::size_t> all = {0, 1, 2, 3};
  const auto oracle = BruteTree::grow(X, y, all);
  for (double a = 0; a <= 5; a += 0.25) {
    for (double b = 0; b <= 9; b += 0.5) {
      const std::vector<double> x = {a, b};
      EXPECT_DOUBLE_EQ(model.predict_row(x), BruteTree::predict(*oracle, x));
    }
  }
}

// Several features can induce the same partition with equal SSE, so the
// comparison is on training error per depth limit rather than thresholds.
TEST(Tree, MatchesBruteForceOnRandomSmallInstances) {
  sb::SplitMix64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 3 + rng.below(10), p = 1 + rng.below(3);
    const auto X = random_matrix(n, p, rng);
    std::vector<double> y(n);
    for (auto& v : y) v = rng.uniform(0, 100);
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), 0);
    for (int depth = 1; depth <= 6; ++depth) {
      const auto oracle = BruteTree::grow(X, y, rows, depth);
      auto s = spec(m::Algorithm::dtr);
      s.tree.max_depth = depth;
      const auto model = m::fit(s, X, y);
      double sse_model = 0, sse_oracle = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const auto x = X.row(i);
        sse_model += std::pow(model.predict_row(x) - y[i], 2);
        sse_oracle += std::pow(BruteTree::predict(*oracle, x) - y[i], 2);
      }
      EXPECT_NEAR(sse_model, sse_oracle, 1e-9 * (1 + sse_oracle))
          << "trial " << trial << " depth " << depth;
    }
  }
}

TEST(Tree, UnlimitedDepthInterpolatesDistinctRows) {
  sb::SplitMix64 rng(5);
  const auto X = random_matrix(100, 3, rng);
  std::vector<double> y(100);
  for (auto& v : y) v = rng.normal(400, 100);
  const auto model = m::fit(spec(m::Algorithm::dtr), X, y);
  const auto pred = m::predict(model, X);
  for (std::size_t i = 0; i < 100; ++i) EXPECT_EQ(pred[i], y[i]);
}

TEST(Tree, RespectsDepthAndLeafLimits) {
  sb::SplitMix64 rng(6);
  const auto X = random_matrix(300, 2, rng);
  std::vector<double> y(300);
  for (auto& v : y) v = rng.normal(0, 1);
  auto s = spec(m::Algorithm::dtr);
  s.tree.max_depth = 3;
  const auto fitted = m::fit(s, X, y);
  const auto& shallow = std::get<m::RegressionTree>(fitted.state);
  EXPECT_LE(shallow.depth(), 3);
  EXPECT_LE(shallow.leaf_count(), 8u);
  s.tree = {};
  s.tree.min_samples_leaf = 40;
  const auto model = m::fit(s, X, y);
  const auto pred = m::predict(model, X);
  std::map<double, int> leaf_sizes;
  for (double v : pred) ++leaf_sizes[v];
  for (const auto& [value, size] : leaf_sizes) EXPECT_GE(size, 40);
}

TEST(Tree, ConstantTargetGivesSingleLeaf) {
  sb::SplitMix64 rng(7);
  const auto X = random_matrix(50, 3, rng);
  const auto model = m::fit(spec(m::Algorithm::dtr), X, std::vector<double>(50, 7.0));
  EXPECT_EQ(std::get<m::RegressionTree>(model.state).node_count(), 1u);
}

// ---------------------------------------------------------------------------
// Ensembles

TEST(Forest, SingleTreeWithoutBootstrapEqualsCart) {
  sb::SplitMix64 rng(8);
  const auto X = random_matrix(150, 4, rng);
  std::vector<double> y(150);
  for (std::size_t i = 0; i < 150; ++i) y[i] = X.at(i, 0) * X.at(i, 1) + rng.normal(0, 0.1);
  auto s = spec(m::Algorithm::rf);
  s.forest.n_estimators = 1;
  s.forest.bootstrap = false;
  const auto rf = m::fit(s, X, y);
  const auto dtr = m::fit(spec(m::Algorithm::dtr), X, y);
  sb::SplitMix64 probe(9);
  const auto Xt = random_matrix(200, 4, probe);
  EXPECT_EQ(m::predict(rf, Xt), m::predict(dtr, Xt));
}

TEST(Forest, DeterministicAndIndependentOfJobs) {
  sb::SplitMix64 rng(10);
  const auto X = random_matrix(120, 3, rng);
  std::vector<double> y(120);
  for (auto& v : y) v = rng.normal(0, 1);
  auto s = spec(m::Algorithm::rf);
  s.forest.n_estimators = 20;
  const auto a = m::fit(s, X, y);
  s.forest.n_jobs = 3;
  const auto b = m::fit(s, X, y);
  EXPECT_EQ(std::get<m::Forest>(a.state), std::get<m::Forest>(b.state));
  s.seed = 11;
  const auto c = m::fit(s, X, y);
  EXPECT_NE(m::predict(a, X), m::predict(c, X));
}

TEST(Forest, MaxFeaturesRestrictsSplits) {
  sb::SplitMix64 rng(12);
  const auto X = random_matrix(200, 5, rng);
  std::vector<double> y(200);
  for (std::size_t i = 0; i < 200; ++i) y[i] = X.at(i, 2);
  auto s = spec(m::Algorithm::rf);
  s.forest.n_estimators = 10;
  s.forest.tree.max_features = 1;
  const auto f = std::get<m::Forest>(m::fit(s, X, y).state);
  std::set<int> used;
  for (const auto& t : f.trees) {
    for (auto j : t.feature) {
      if (j >= 0) used.insert(j);
    }
  }
  EXPECT_GT(used.size(), 1u);
}

TEST(Boosting, TrainingLossNeverIncreases) {
  sb::SplitMix64 rng(13);
  const auto X = random_matrix(300, 3, rng);
  std::vector<double> y(300);
  for (std::size_t i = 0; i < 300; ++i) {
    y[i] = std::sin(X.at(i, 0)) * 10 + X.at(i, 1) + rng.normal(0, 0.5);
  }
  const auto model = m::fit(spec(m::Algorithm::gbr), X, y);
  const auto& b = std::get<m::Boosting>(model.state);
  ASSERT_EQ(b.train_loss.size(), 101u);
  for (std::size_t s = 1; s < b.train_loss.size(); ++s) {
    EXPECT_LE(b.train_loss[s], b.train_loss[s - 1] + 1e-12) << "stage " << s;
  }
  EXPECT_LT(b.train_loss.back(), 0.2 * b.train_loss.front());
  double mean = 0;
  for (double v : y) mean += v / 300;
  EXPECT_NEAR(b.initial, mean, 1e-9);
  for (const auto& t : b.trees) EXPECT_LE(t.depth(), 3);
}

TEST(Boosting, SingleStageIsShrunkTree) {
  const auto X = m::FeatureMatrix::from_rows({{0}, {1}, {2}, {3}});
  const std::vector<double> y = {0, 0, 10, 10};
  auto s = spec(m::Algorithm::gbr);
  s.boosting.n_estimators = 1;
  s.boosting.learning_rate = 0.5;
  const auto model = m::fit(s, X, y);
  // mean 5, residual tree predicts -5 / +5
  EXPECT_DOUBLE_EQ(model.predict_row(std::vector<double>{0}), 2.5);
  EXPECT_DOUBLE_EQ(model.predict_row(std::vector<double>{3}), 7.5);
}

// ---------------------------------------------------------------------------
// Model interface

TEST(Model, RejectsDegenerateInput) {
  const m::FeatureMatrix empty(5, {});
  EXPECT_THROW(m::fit(spec(m::Algorithm::lr), empty, std::vector<double>(5)),
               sb::FitError);
  const auto one = m::FeatureMatrix::from_rows({{1.0}});
  EXPECT_THROW(m::fit(spec(m::Algorithm::lr), one, {1.0}), sb::FitError);
  auto X = m::FeatureMatrix::from_rows({{1.0}, {std::nan("")}});
  EXPECT_THROW(m::fit(spec(m::Algorithm::dtr), X, {1.0, 2.0}), sb::FitError);
  auto bad = spec(m::Algorithm::rr);
  bad.alpha = -1;
  EXPECT_THROW(m::fit(bad, m::FeatureMatrix::from_rows({{1.0}, {2.0}}), {1.0, 2.0}),
               sb::FitError);
}

TEST(Model, PredictChecksSchema) {
  const auto X = m::FeatureMatrix::from_rows({{1.0}, {2.0}, {3.0}});
  const auto model = m::fit(spec(m::Algorithm::lr), X, {1, 2, 3});
  m::FeatureMatrix other = X;
  other.names = {"other"};
  EXPECT_THROW(m::predict(model, other), sb::PredictError);
}

TEST(Model, JsonRoundTripPreservesPredictions) {
  sb::SplitMix64 rng(14);
  const auto X = random_matrix(80, 3, rng);
  std::vector<double> y(80);
  for (auto& v : y) v = rng.normal(0, 1);
  for (m::Algorithm a : m::kAllAlgorithms) {
    auto s = spec(a);
    s.forest.n_estimators = 5;
    s.boosting.n_estimators = 5;
    const auto model = m::fit(s, X, y);
    const auto back = m::model_from_json(nlohmann::json::parse(m::to_json(model).dump()));
    EXPECT_EQ(m::predict(back, X), m::predict(model, X)) << m::to_string(a);
    EXPECT_EQ(back.spec.algorithm, a);
  }
}

TEST(Model, ParseAlgorithm) {
  EXPECT_EQ(m::parse_algorithm("gbr"), m::Algorithm::gbr);
  EXPECT_THROW(m::parse_algorithm("svm"), sb::ConfigError);
}
