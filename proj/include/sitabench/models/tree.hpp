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

// CART regression trees.
//
// Splits are chosen greedily to minimize the weighted within-node squared
// error. Candidate thresholds are midpoints between consecutive distinct
// feature values; a row goes left when `x <= threshold`. Among equally good
// splits the lowest feature index wins, then the lowest threshold.
//
// The builder works on a column-major copy of the data presorted once per
// feature. Each node owns the same contiguous range in every per-feature
// order, and a split stably partitions all of them, so a level of the tree
// costs O(rows * features) and no sorting happens below the root.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "sitabench/error.hpp"
#include "sitabench/models/encode.hpp"
#include "sitabench/random.hpp"

namespace sitabench::models {

struct TreeParams {
  int max_depth = 0;  // 0 = unlimited
  std::size_t min_samples_split = 2;
  std::size_t min_samples_leaf = 1;
  std::size_t max_features = 0;  // 0 = all features at every split

  void validate() const {
    if (max_depth < 0) throw FitError("max_depth must be >= 0");
    if (min_samples_split < 2) throw FitError("min_samples_split must be >= 2");
    if (min_samples_leaf < 1) throw FitError("min_samples_leaf must be >= 1");
  }

  friend bool operator==(const TreeParams&, const TreeParams&) = default;
};

/// Flattened binary tree; node 0 is the root. Leaves have feature == -1.
struct RegressionTree {
  std::size_t n_features = 0;
  std::vector<std::int32_t> feature;
  std::vector<double> threshold;
  std::vector<std::int32_t> left;
  std::vector<std::int32_t> right;
  std::vector<double> value;

  std::size_t node_count() const noexcept { return value.size(); }

  std::size_t leaf_count() const noexcept {
    return static_cast<std::size_t>(
        std::count(feature.begin(), feature.end(), -1));
  }

  int depth() const {
    if (value.empty()) return 0;
    std::vector<int> d(value.size(), 0);
    int deepest = 0;
    for (std::size_t i = 0; i < value.size(); ++i) {
      if (feature[i] >= 0) {
        d[static_cast<std::size_t>(left[i])] = d[i] + 1;
        d[static_cast<std::size_t>(right[i])] = d[i] + 1;
        deepest = std::max(deepest, d[i] + 1);
      }
    }
    return deepest;
  }

  double predict_row(std::span<const double> x) const {
    std::size_t node = 0;
    while (feature[node] >= 0) {
      node = static_cast<std::size_t>(
          x[static_cast<std::size_t>(feature[node])] <= threshold[node]
              ? left[node]
              : right[node]);
    }
    return value[node];
  }

  friend bool operator==(const RegressionTree&, const RegressionTree&) = default;
};

/// Column-major training data with one presorted row order per feature.
class ColumnData {
 public:
  explicit ColumnData(const FeatureMatrix& X)
      : rows_(X.rows), cols_(X.cols), values_(X.rows * X.cols), order_(X.cols) {
    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t j = 0; j < cols_; ++j) {
        values_[j * rows_ + i] = X.at(i, j);
      }
    }
    for (std::size_t j = 0; j < cols_; ++j) {
      auto& ord = order_[j];
      ord.resize(rows_);
      std::iota(ord.begin(), ord.end(), 0u);
      const double* col = column(j);
      std::sort(ord.begin(), ord.end(), [col](std::uint32_t a, std::uint32_t b) {
        return col[a] < col[b] || (col[a] == col[b] && a < b);
      });
    }
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  const double* column(std::size_t j) const { return values_.data() + j * rows_; }
  const std::vector<std::uint32_t>& order(std::size_t j) const {
    return order_[j];
  }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> values_;
  std::vector<std::vector<std::uint32_t>> order_;
};

namespace detail {

struct SplitChoice {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double score = 0.0;
};

inline double midpoint(double lo, double hi) {
  double mid = lo + (hi - lo) * 0.5;
  if (!(mid < hi)) mid = lo;
  return mid;
}

}  // namespace detail

/// Grows one tree on `y` with integer row weights (bootstrap counts); an
/// empty `weights` span means every row once. `rng` is consumed only when
/// `params.max_features` restricts the candidate features.
inline RegressionTree build_tree(const ColumnData& data,
                                 std::span<const double> y,
                                 std::span<const std::uint32_t> weights,
                                 const TreeParams& params, SplitMix64& rng) {
  params.validate();
  const std::size_t n = data.rows();
  const std::size_t p = data.cols();
  if (y.size() != n) throw FitError("target length does not match rows");
  if (!weights.empty() && weights.size() != n) {
    throw FitError("weight length does not match rows");
  }
  auto weight = [&](std::uint32_t r) -> double {
    return weights.empty() ? 1.0 : static_cast<double>(weights[r]);
  };

  std::vector<std::uint32_t> active;
  active.reserve(n);
  for (std::uint32_t r = 0; r < n; ++r) {
    if (weight(r) > 0) active.push_back(r);
  }
  const std::size_t m = active.size();
  if (m == 0) throw FitError("no rows with positive weight");

  // order[j * m + k]: k-th active row by feature j.
  std::vector<std::uint32_t> order(p * m);
  for (std::size_t j = 0; j < p; ++j) {
    std::size_t k = 0;
    for (std::uint32_t r : data.order(j)) {
      if (weight(r) > 0) order[j * m + k++] = r;
    }
  }

  RegressionTree tree;
  tree.n_features = p;
  auto new_node = [&tree]() {
    tree.feature.push_back(-1);
    tree.threshold.push_back(0.0);
    tree.left.push_back(-1);
    tree.right.push_back(-1);
    tree.value.push_back(0.0);
    return static_cast<std::int32_t>(tree.value.size() - 1);
  };

  struct Pending {
    std::size_t begin;
    std::size_t end;
    int depth;
    std::int32_t node;
  };
  std::vector<Pending> stack;
  stack.push_back({0, m, 0, new_node()});

  std::vector<std::size_t> candidates(p);
  std::vector<std::uint8_t> goes_left(n, 0);
  std::vector<std::uint32_t> scratch(m);

  while (!stack.empty()) {
    const Pending node = stack.back();
    stack.pop_back();
    const std::size_t count = node.end - node.begin;
    const std::uint32_t* rows0 = order.data() + node.begin;

    double w_total = 0.0;
    double s_total = 0.0;
    double y_min = std::numeric_limits<double>::infinity();
    double y_max = -y_min;
    for (std::size_t k = 0; k < count; ++k) {
      const std::uint32_t r = rows0[k];
      w_total += weight(r);
      s_total += weight(r) * y[r];
      y_min = std::min(y_min, y[r]);
      y_max = std::max(y_max, y[r]);
    }
    const double mean = s_total / w_total;
    tree.value[static_cast<std::size_t>(node.node)] = mean;

    if (count < params.min_samples_split ||
        count < 2 * params.min_samples_leaf ||
        (params.max_depth > 0 && node.depth >= params.max_depth) ||
        y_min == y_max) {
      continue;
    }

    std::size_t n_candidates = p;
    std::iota(candidates.begin(), candidates.end(), std::size_t{0});
    if (params.max_features > 0 && params.max_features < p) {
      for (std::size_t i = 0; i < params.max_features; ++i) {
        const std::size_t j =
            i + static_cast<std::size_t>(rng.below(p - i));
        std::swap(candidates[i], candidates[j]);
      }
      n_candidates = params.max_features;
      std::sort(candidates.begin(),
                candidates.begin() + static_cast<std::ptrdiff_t>(n_candidates));
    }

    // With targets centred on the node mean the between-child term reduces
    // to s_left^2 * (1/w_left + 1/w_right), maximized by the best split.
    detail::SplitChoice best;
    for (std::size_t c = 0; c < n_candidates; ++c) {
      const std::size_t j = candidates[c];
      const double* x = data.column(j);
      const std::uint32_t* rows = order.data() + j * m + node.begin;
      if (x[rows[0]] == x[rows[count - 1]]) continue;
      double w_left = 0.0;
      double s_left = 0.0;
      for (std::size_t k = 0; k + 1 < count; ++k) {
        const std::uint32_t r = rows[k];
        w_left += weight(r);
        s_left += weight(r) * (y[r] - mean);
        const double x_here = x[r];
        const double x_next = x[rows[k + 1]];
        if (!(x_here < x_next)) continue;
        if (k + 1 < params.min_samples_leaf ||
            count - (k + 1) < params.min_samples_leaf) {
          continue;
        }
        const double w_right = w_total - w_left;
        const double score = s_left * s_left * (1.0 / w_left + 1.0 / w_right);
        if (!best.found || score > best.score) {
          best = {true, j, detail::midpoint(x_here, x_next), score};
        }
      }
    }
    if (!best.found) continue;

    const double* xs = data.column(best.feature);
    std::size_t n_left = 0;
    for (std::size_t k = 0; k < count; ++k) {
      const std::uint32_t r = rows0[k];
      goes_left[r] = xs[r] <= best.threshold ? 1 : 0;
      n_left += goes_left[r];
    }
    for (std::size_t j = 0; j < p; ++j) {
      std::uint32_t* rows = order.data() + j * m + node.begin;
      std::size_t l = 0;
      std::size_t rr = n_left;
      for (std::size_t k = 0; k < count; ++k) {
        const std::uint32_t r = rows[k];
        if (goes_left[r]) {
          scratch[l++] = r;
        } else {
          scratch[rr++] = r;
        }
      }
      std::copy(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(count),
                rows);
    }

    const std::size_t id = static_cast<std::size_t>(node.node);
    tree.feature[id] = static_cast<std::int32_t>(best.feature);
    tree.threshold[id] = best.threshold;
    const std::int32_t left_id = new_node();
    const std::int32_t right_id = new_node();
    tree.left[id] = left_id;
    tree.right[id] = right_id;
    stack.push_back({node.begin + n_left, node.end, node.depth + 1, right_id});
    stack.push_back({node.begin, node.begin + n_left, node.depth + 1, left_id});
  }
  return tree;
}

inline TargetVector predict_tree(const RegressionTree& tree,
                                 const FeatureMatrix& X) {
  TargetVector out(X.rows);
  for (std::size_t i = 0; i < X.rows; ++i) out[i] = tree.predict_row(X.row(i));
  return out;
}

}  // namespace sitabench::models
