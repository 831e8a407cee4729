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

// Evaluation protocol: seeded train/test split, k-fold plans, the three
// regression metrics and cross-validated score reports.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sitabench/error.hpp"
#include "sitabench/models/model.hpp"
#include "sitabench/random.hpp"
#include "sitabench/text.hpp"

namespace sitabench::eval {

using models::FeatureMatrix;
using models::ModelSpec;
using models::TargetVector;

struct SplitSpec {
  double train_fraction = 0.8;
  std::uint64_t seed = 10;

  void validate() const {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
      throw SplitError("train_fraction must lie strictly between 0 and 1");
    }
  }
};

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Random sampling without replacement: a Fisher-Yates permutation of 0..n-1
/// drawn from SplitMix64(seed); the first round(fraction * n) positions
/// (clamped so both sides are non-empty) form the training set. Both index
/// lists are returned in ascending order.
inline Split split(std::size_t n, const SplitSpec& spec = {}) {
  spec.validate();
  if (n < 2) throw SplitError("need at least 2 rows to split");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  SplitMix64 rng(spec.seed);
  shuffle(std::span<std::size_t>(perm), rng);
  auto n_train = static_cast<std::size_t>(
      std::llround(spec.train_fraction * static_cast<double>(n)));
  n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
  Split out;
  out.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

struct FoldPlan {
  std::size_t n = 0;
  std::size_t k = 10;
  bool shuffle = true;
  std::uint64_t seed = 10;
  std::vector<Fold> folds;
};

/// Validation folds are consecutive chunks of the (optionally shuffled)
/// index sequence; the first n % k folds hold one extra row.
inline FoldPlan kfold(std::size_t n, std::size_t k = 10, bool shuffle = true,
                      std::uint64_t seed = 10) {
  if (k < 2) throw FoldError("k must be >= 2");
  if (k > n) {
    throw FoldError("cannot make " + std::to_string(k) + " folds from " +
                    std::to_string(n) + " rows");
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  if (shuffle) {
    SplitMix64 rng(seed);
    sitabench::shuffle(std::span<std::size_t>(perm), rng);
  }
  FoldPlan plan{n, k, shuffle, seed, {}};
  std::vector<std::uint8_t> in_fold(n);
  std::size_t start = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = n / k + (f < n % k ? 1 : 0);
    Fold fold;
    fold.validation.assign(perm.begin() + static_cast<std::ptrdiff_t>(start),
                           perm.begin() + static_cast<std::ptrdiff_t>(start + size));
    std::sort(fold.validation.begin(), fold.validation.end());
    std::fill(in_fold.begin(), in_fold.end(), 0);
    for (std::size_t i : fold.validation) in_fold[i] = 1;
    fold.train.reserve(n - size);
    for (std::size_t i = 0; i < n; ++i) {
      if (!in_fold[i]) fold.train.push_back(i);
    }
    plan.folds.push_back(std::move(fold));
    start += size;
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Metrics

namespace detail {

inline void check_lengths(std::span<const double> y, std::span<const double> p,
                          std::size_t min_len, const char* metric) {
  if (y.size() != p.size()) {
    throw Error(std::string(metric) + ": length mismatch");
  }
  if (y.size() < min_len) {
    throw Error(std::string(metric) + ": need at least " +
                std::to_string(min_len) + " values");
  }
}

}  // namespace detail

/// Coefficient of determination, 1 - SS_res / SS_tot.
inline double r2(std::span<const double> y, std::span<const double> pred) {
  detail::check_lengths(y, pred, 2, "r2");
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    ss_res += (y[i] - pred[i]) * (y[i] - pred[i]);
    ss_tot += (y[i] - mean) * (y[i] - mean);
  }
  if (ss_tot == 0.0) {
    throw UndefinedVarianceError("r2 is undefined for a constant target");
  }
  return 1.0 - ss_res / ss_tot;
}

inline double mae(std::span<const double> y, std::span<const double> pred) {
  detail::check_lengths(y, pred, 1, "mae");
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += std::abs(y[i] - pred[i]);
  return s / static_cast<double>(y.size());
}

inline double rmse(std::span<const double> y, std::span<const double> pred) {
  detail::check_lengths(y, pred, 1, "rmse");
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    s += (y[i] - pred[i]) * (y[i] - pred[i]);
  }
  return std::sqrt(s / static_cast<double>(y.size()));
}

// ---------------------------------------------------------------------------
// Score reports

/// Reported metrics. The `_rel` variants divide the error by the mean of the
/// validation target, expressing it as a fraction of the mean CO2 level.
enum class Metric { r2, mae, rmse, mae_rel, rmse_rel };

inline constexpr Metric kAllMetrics[] = {Metric::r2, Metric::mae, Metric::rmse,
                                         Metric::mae_rel, Metric::rmse_rel};

inline std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::r2: return "r2";
    case Metric::mae: return "mae";
    case Metric::rmse: return "rmse";
    case Metric::mae_rel: return "mae_rel";
    case Metric::rmse_rel: return "rmse_rel";
  }
  return "unknown";
}

inline std::optional<Metric> parse_metric(std::string_view name) {
  for (Metric m : kAllMetrics) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

struct MetricSummary {
  std::vector<std::optional<double>> folds;  // nullopt = undefined, excluded
  double mean = std::numeric_limits<double>::quiet_NaN();
  double sd = std::numeric_limits<double>::quiet_NaN();
  std::size_t n_excluded = 0;

  /// Mean and population standard deviation over the defined folds.
  void summarize() {
    std::vector<double> v;
    for (const auto& f : folds) {
      if (f) v.push_back(*f);
    }
    n_excluded = folds.size() - v.size();
    if (v.empty()) {
      mean = sd = std::numeric_limits<double>::quiet_NaN();
      return;
    }
    double s = 0.0;
    for (double x : v) s += x;
    mean = s / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    sd = std::sqrt(ss / static_cast<double>(v.size()));
  }
};

struct FoldScore {
  std::optional<double> r2;
  double mae = 0.0;
  double rmse = 0.0;
  std::optional<double> mae_rel;  // undefined when the mean target is 0
  std::optional<double> rmse_rel;
};

inline FoldScore score(std::span<const double> y, std::span<const double> pred) {
  FoldScore s;
  try {
    s.r2 = r2(y, pred);
  } catch (const UndefinedVarianceError&) {
  } catch (const Error&) {
    // fewer than two validation rows: r2 undefined as well
  }
  s.mae = mae(y, pred);
  s.rmse = rmse(y, pred);
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  if (mean != 0.0) {
    s.mae_rel = s.mae / mean;
    s.rmse_rel = s.rmse / mean;
  }
  return s;
}

struct ScoreReport {
  std::string model;
  std::string config;
  MetricSummary r2;
  MetricSummary mae;
  MetricSummary rmse;
  MetricSummary mae_rel;
  MetricSummary rmse_rel;
  double fit_seconds = 0.0;
  std::optional<FoldScore> holdout;

  MetricSummary& metric(Metric m) {
    switch (m) {
      case Metric::r2: return r2;
      case Metric::mae: return mae;
      case Metric::rmse: return rmse;
      case Metric::mae_rel: return mae_rel;
      case Metric::rmse_rel: return rmse_rel;
    }
    return r2;
  }
  const MetricSummary& metric(Metric m) const {
    return const_cast<ScoreReport*>(this)->metric(m);
  }

  void add_fold(const FoldScore& s) {
    r2.folds.push_back(s.r2);
    mae.folds.push_back(s.mae);
    rmse.folds.push_back(s.rmse);
    mae_rel.folds.push_back(s.mae_rel);
    rmse_rel.folds.push_back(s.rmse_rel);
  }

  void summarize() {
    for (Metric m : kAllMetrics) metric(m).summarize();
  }

  std::size_t fold_count() const { return r2.folds.size(); }
};

/// Fits once per fold on the training indices and scores the validation
/// indices. Folds with a constant validation target have r2 excluded.
inline ScoreReport cross_validate(const ModelSpec& spec, const FeatureMatrix& X,
                                  const TargetVector& y, const FoldPlan& plan) {
  if (y.size() != X.rows) throw Error("target length does not match rows");
  ScoreReport report;
  report.model = std::string(models::to_string(spec.algorithm));
  double seconds = 0.0;
  for (const Fold& fold : plan.folds) {
    for (std::size_t i : fold.train) {
      if (i >= X.rows) throw FoldError("fold index out of range");
    }
    for (std::size_t i : fold.validation) {
      if (i >= X.rows) throw FoldError("fold index out of range");
    }
    const FeatureMatrix X_train = X.select_rows(fold.train);
    const TargetVector y_train = models::select(y, fold.train);
    const FeatureMatrix X_val = X.select_rows(fold.validation);
    const TargetVector y_val = models::select(y, fold.validation);
    const auto t0 = std::chrono::steady_clock::now();
    const auto model = models::fit(spec, X_train, y_train);
    seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                   .count();
    const TargetVector pred = models::predict(model, X_val);
    report.add_fold(score(y_val, pred));
  }
  report.fit_seconds = seconds;
  report.summarize();
  return report;
}

/// Fit on one index set, score on another.
inline FoldScore holdout_score(const ModelSpec& spec, const FeatureMatrix& X,
                               const TargetVector& y,
                               std::span<const std::size_t> train,
                               std::span<const std::size_t> test) {
  const auto model = models::fit(spec, X.select_rows(train), models::select(y, train));
  const TargetVector pred = models::predict(model, X.select_rows(test));
  return score(models::select(y, test), pred);
}

inline std::string format_metric_value(double v) {
  return std::isfinite(v) ? format_number(v) : std::string();
}

/// Header of the long-form sweep table for `k` folds.
inline csv::Row score_header(std::size_t k) {
  csv::Row h = {"config", "model", "metric"};
  for (std::size_t f = 0; f < k; ++f) h.push_back("fold_" + std::to_string(f));
  h.insert(h.end(), {"mean", "sd", "n_excluded_folds"});
  return h;
}

/// One row per metric: config,model,metric,fold_0..fold_{k-1},mean,sd,
/// n_excluded_folds. Undefined values are written as empty fields.
inline std::vector<csv::Row> score_rows(const ScoreReport& report) {
  std::vector<csv::Row> rows;
  for (Metric m : kAllMetrics) {
    const MetricSummary& s = report.metric(m);
    csv::Row row = {report.config, report.model, std::string(to_string(m))};
    for (const auto& f : s.folds) {
      row.push_back(f ? format_metric_value(*f) : std::string());
    }
    row.push_back(format_metric_value(s.mean));
    row.push_back(format_metric_value(s.sd));
    row.push_back(std::to_string(s.n_excluded));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace sitabench::eval
