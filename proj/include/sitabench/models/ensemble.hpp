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

// Tree ensembles: bagged random forests and least-squares gradient boosting.

#include <cstdint>
#include <thread>
#include <vector>

#include "sitabench/error.hpp"
#include "sitabench/models/encode.hpp"
#include "sitabench/models/tree.hpp"
#include "sitabench/random.hpp"

namespace sitabench::models {

struct ForestParams {
  std::size_t n_estimators = 100;
  bool bootstrap = true;
  TreeParams tree;  // tree.max_features 0 = every feature per split
  unsigned n_jobs = 1;

  friend bool operator==(const ForestParams& a, const ForestParams& b) {
    return a.n_estimators == b.n_estimators && a.bootstrap == b.bootstrap &&
           a.tree == b.tree;
  }
};

struct Forest {
  std::vector<RegressionTree> trees;

  double predict_row(std::span<const double> x) const {
    double sum = 0.0;
    for (const auto& t : trees) sum += t.predict_row(x);
    return sum / static_cast<double>(trees.size());
  }

  friend bool operator==(const Forest&, const Forest&) = default;
};

/// Tree t draws its bootstrap sample and split features from stream t of
/// `seed`, so the result does not depend on `n_jobs`.
inline Forest fit_forest(const FeatureMatrix& X, const TargetVector& y,
                         const ForestParams& params, std::uint64_t seed) {
  if (params.n_estimators == 0) throw FitError("forest needs >= 1 tree");
  const ColumnData data(X);
  const std::size_t n = X.rows;
  Forest forest;
  forest.trees.resize(params.n_estimators);

  auto grow = [&](std::size_t t) {
    SplitMix64 rng = SplitMix64::stream(seed, t);
    std::vector<std::uint32_t> counts;
    if (params.bootstrap) {
      counts.assign(n, 0);
      for (std::size_t i = 0; i < n; ++i) ++counts[rng.below(n)];
    }
    forest.trees[t] = build_tree(data, y, counts, params.tree, rng);
  };

  const unsigned jobs = std::max(1u, params.n_jobs);
  if (jobs == 1) {
    for (std::size_t t = 0; t < params.n_estimators; ++t) grow(t);
  } else {
    std::vector<std::jthread> workers;
    for (unsigned w = 0; w < jobs; ++w) {
      workers.emplace_back([&, w] {
        for (std::size_t t = w; t < params.n_estimators; t += jobs) grow(t);
      });
    }
  }
  return forest;
}

struct BoostingParams {
  std::size_t n_estimators = 100;
  double learning_rate = 0.1;
  int max_depth = 3;
  std::size_t min_samples_split = 2;
  std::size_t min_samples_leaf = 1;

  friend bool operator==(const BoostingParams&, const BoostingParams&) = default;
};

struct Boosting {
  double initial = 0.0;
  double learning_rate = 0.1;
  std::vector<RegressionTree> trees;
  // Training MSE after 0, 1, ..., n stages.
  std::vector<double> train_loss;

  double predict_row(std::span<const double> x) const {
    double sum = 0.0;
    for (const auto& t : trees) sum += t.predict_row(x);
    return initial + learning_rate * sum;
  }

  friend bool operator==(const Boosting& a, const Boosting& b) {
    return a.initial == b.initial && a.learning_rate == b.learning_rate &&
           a.trees == b.trees;
  }
};

/// Starts from the target mean; each stage fits a depth-limited tree to the
/// current residuals and adds it scaled by the learning rate.
inline Boosting fit_boosting(const FeatureMatrix& X, const TargetVector& y,
                             const BoostingParams& params, std::uint64_t seed) {
  if (!(params.learning_rate > 0.0)) {
    throw FitError("learning_rate must be > 0");
  }
  const ColumnData data(X);
  const std::size_t n = X.rows;
  Boosting model;
  model.learning_rate = params.learning_rate;
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(n);
  model.initial = mean;

  std::vector<double> fitted(n, mean);
  std::vector<double> residual(n);
  auto mse = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = y[i] - fitted[i];
      s += e * e;
    }
    return s / static_cast<double>(n);
  };
  model.train_loss.push_back(mse());

  TreeParams tree_params;
  tree_params.max_depth = params.max_depth;
  tree_params.min_samples_split = params.min_samples_split;
  tree_params.min_samples_leaf = params.min_samples_leaf;
  SplitMix64 rng = SplitMix64::stream(seed, 0);
  for (std::size_t stage = 0; stage < params.n_estimators; ++stage) {
    for (std::size_t i = 0; i < n; ++i) residual[i] = y[i] - fitted[i];
    RegressionTree tree = build_tree(data, residual, {}, tree_params, rng);
    for (std::size_t i = 0; i < n; ++i) {
      fitted[i] += params.learning_rate * tree.predict_row(X.row(i));
    }
    model.trees.push_back(std::move(tree));
    model.train_loss.push_back(mse());
  }
  return model;
}

}  // namespace sitabench::models
