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
#include <set>

#include "sitabench/eval.hpp"
#include "sitabench/random.hpp"

namespace sb = sitabench;
namespace ev = sitabench::eval;
namespace m = sitabench::models;

namespace {

long double brute_r2(const std::vector<double>& y, const std::vector<double>& p) {
  long double mean = 0, ss_res = 0, ss_tot = 0;
  for (double v : y) mean += v;
  mean /= y.size();
  for (std::size_t i = 0; i < y.size(); ++i) {
    ss_res += (static_cast<long double>(y[i]) - p[i]) * (static_cast<long double>(y[i]) - p[i]);
    ss_tot += (y[i] - mean) * (y[i] - mean);
  }
  return 1 - ss_res / ss_tot;
}

long double brute_mae(const std::vector<double>& y, const std::vector<double>& p) {
  long double s = 0;
  for (std::size_t i = 0; i < y.size(); ++i) s += std::fabs(static_cast<long double>(y[i]) - p[i]);
  return s / y.size();
}

long double brute_rmse(const std::vector<double>& y, const std::vector<double>& p) {
  long double s = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    s += (static_cast<long double>(y[i]) - p[i]) * (static_cast<long double>(y[i]) - p[i]);
  }
  return std::sqrt(s / y.size());
}

void expect_valid_plan(const ev::FoldPlan& plan, std::size_t n, std::size_t k) {
  ASSERT_EQ(plan.folds.size(), k);
  std::vector<int> seen(n, 0);
  std::size_t lo = n, hi = 0;
  for (const auto& f : plan.folds) {
    lo = std::min(lo, f.validation.size());
    hi = std::max(hi, f.validation.size());
    EXPECT_EQ(f.train.size() + f.validation.size(), n);
    std::set<std::size_t> val(f.validation.begin(), f.validation.end());
    for (auto i : f.train) EXPECT_EQ(val.count(i), 0u);
    for (auto i : f.validation) ++seen[i];
  }
  for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(seen[i], 1) << "row " << i;
  EXPECT_LE(hi - lo, 1u);
}

}  // namespace

TEST(Split, SizesFollowRounding) {
  const auto s10 = ev::split(10);
  EXPECT_EQ(s10.train.size(), 8u);
  EXPECT_EQ(s10.test.size(), 2u);
  const auto s5 = ev::split(5);
  EXPECT_EQ(s5.train.size(), 4u);
  EXPECT_EQ(s5.test.size(), 1u);
  EXPECT_EQ(ev::split(2).train.size(), 1u);
  EXPECT_EQ(ev::split(3).train.size(), 2u);  // round(2.4)
  EXPECT_EQ(ev::split(8).train.size(), 6u);  // round(6.4)
}

TEST(Split, DisjointCoveringAndDeterministic) {
  for (std::size_t n = 2; n < 300; n += 7) {
    const auto s = ev::split(n);
    std::set<std::size_t> all(s.train.begin(), s.train.end());
    for (auto i : s.test) EXPECT_TRUE(all.insert(i).second);
    EXPECT_EQ(all.size(), n);
    EXPECT_EQ(*all.rbegin(), n - 1);
    const auto again = ev::split(n);
    EXPECT_EQ(again.train, s.train);
    EXPECT_EQ(again.test, s.test);
  }
  EXPECT_NE(ev::split(100, {0.8, 10}).test, ev::split(100, {0.8, 11}).test);
}

TEST(Split, Errors) {
  EXPECT_THROW(ev::split(1), sb::SplitError);
  EXPECT_THROW(ev::split(10, {1.0, 10}), sb::SplitError);
  EXPECT_THROW(ev::split(10, {0.0, 10}), sb::SplitError);
}

TEST(KFold, SingletonFolds) {
  const auto plan = ev::kfold(10, 10);
  for (const auto& f : plan.folds) EXPECT_EQ(f.validation.size(), 1u);
  expect_valid_plan(plan, 10, 10);
}

TEST(KFold, LargerFoldsFirst) {
  const auto plan = ev::kfold(23, 10);
  std::vector<std::size_t> sizes;
  for (const auto& f : plan.folds) sizes.push_back(f.validation.size());
  EXPECT_EQ(sizes, (std::vector<std::size_t>{3, 3, 3, 2, 2, 2, 2, 2, 2, 2}));
}

TEST(KFold, ContiguousWithoutShuffle) {
  const auto plan = ev::kfold(6, 3, false);
  EXPECT_EQ(plan.folds[0].validation, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(plan.folds[1].validation, (std::vector<std::size_t>{2, 3}));
  EXPECT_EQ(plan.folds[2].validation, (std::vector<std::size_t>{4, 5}));
  EXPECT_EQ(plan.folds[1].train, (std::vector<std::size_t>{0, 1, 4, 5}));
}

TEST(KFold, PropertiesAcrossSizes) {
  for (std::size_t n = 10; n <= 120; ++n) {
    for (std::size_t k : {2u, 5u, 10u}) {
      const auto plan = ev::kfold(n, k, true, n);
      expect_valid_plan(plan, n, k);
      const auto again = ev::kfold(n, k, true, n);
      for (std::size_t f = 0; f < k; ++f) {
        EXPECT_EQ(again.folds[f].validation, plan.folds[f].validation);
      }
    }
  }
}

TEST(KFold, Errors) {
  EXPECT_THROW(ev::kfold(5, 6), sb::FoldError);
  EXPECT_THROW(ev::kfold(5, 1), sb::FoldError);
}

TEST(Metrics, WorkedExamples) {
  const std::vector<double> y = {1, 2, 3};
  EXPECT_DOUBLE_EQ(ev::r2(y, y), 1.0);
  EXPECT_DOUBLE_EQ(ev::r2(y, std::vector<double>{2, 2, 2}), 0.0);
  EXPECT_DOUBLE_EQ(ev::r2(y, std::vector<double>{1, 2, 4}), 0.5);
  EXPECT_DOUBLE_EQ(ev::mae(y, y), 0.0);
  EXPECT_DOUBLE_EQ(ev::mae(std::vector<double>{1, 2}, std::vector<double>{2, 2}), 0.5);
  EXPECT_DOUBLE_EQ(ev::mae(std::vector<double>{0, 0, 0}, std::vector<double>{3, -3, 0}),
                   2.0);
  EXPECT_DOUBLE_EQ(ev::rmse(y, y), 0.0);
  EXPECT_NEAR(ev::rmse(std::vector<double>{1, 2}, std::vector<double>{2, 2}),
              std::sqrt(0.5), 1e-15);
  EXPECT_DOUBLE_EQ(ev::rmse(y, std::vector<double>{1.5, 2.5, 3.5}), 0.5);
}

TEST(Metrics, Errors) {
  EXPECT_THROW(ev::r2(std::vector<double>{3, 3, 3}, std::vector<double>{1, 2, 3}),
               sb::UndefinedVarianceError);
  EXPECT_THROW(ev::r2(std::vector<double>{1}, std::vector<double>{1}), sb::Error);
  EXPECT_THROW(ev::mae(std::vector<double>{}, std::vector<double>{}), sb::Error);
  EXPECT_THROW(ev::mae(std::vector<double>{1, 2}, std::vector<double>{1}), sb::Error);
}

TEST(Metrics, MatchBruteForceFormulas) {
  sb::SplitMix64 rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.below(199);
    std::vector<double> y(n), p(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = rng.normal(500, 150);
      p[i] = y[i] + rng.normal(0, 60);
    }
    EXPECT_NEAR(ev::r2(y, p), static_cast<double>(brute_r2(y, p)), 1e-9);
    EXPECT_NEAR(ev::mae(y, p), static_cast<double>(brute_mae(y, p)), 1e-9);
    EXPECT_NEAR(ev::rmse(y, p), static_cast<double>(brute_rmse(y, p)), 1e-9);
  }
}

TEST(Metrics, RmseDominatesMaeAndPermutationInvariance) {
  sb::SplitMix64 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng.below(60);
    std::vector<double> y(n), p(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = rng.uniform(0, 10);
      p[i] = rng.uniform(0, 10);
    }
    EXPECT_GE(ev::rmse(y, p), ev::mae(y, p) - 1e-12);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    sb::shuffle(std::span<std::size_t>(perm), rng);
    std::vector<double> yp(n), pp(n);
    for (std::size_t i = 0; i < n; ++i) {
      yp[i] = y[perm[i]];
      pp[i] = p[perm[i]];
    }
    EXPECT_NEAR(ev::r2(yp, pp), ev::r2(y, p), 1e-12);
    EXPECT_NEAR(ev::mae(yp, pp), ev::mae(y, p), 1e-12);
    EXPECT_NEAR(ev::rmse(yp, pp), ev::rmse(y, p), 1e-12);
  }
  // Equal absolute errors give equality.
  EXPECT_DOUBLE_EQ(ev::rmse(std::vector<double>{0, 0}, std::vector<double>{2, -2}),
                   ev::mae(std::vector<double>{0, 0}, std::vector<double>{2, -2}));
}

TEST(CrossValidate, PerfectLinearData) {
  sb::SplitMix64 rng(1);
  std::vector<std::vector<double>> rows;
  std::vector<double> y;
  for (int i = 0; i < 50; ++i) {
    const double a = rng.uniform(0, 10), b = rng.uniform(0, 10);
    rows.push_back({a, b});
    y.push_back(3 * a - 2 * b + 1);
  }
  const auto X = m::FeatureMatrix::from_rows(rows);
  const auto report = ev::cross_validate(m::ModelSpec::defaults(m::Algorithm::lr), X, y,
                                         ev::kfold(50, 10));
  EXPECT_NEAR(report.r2.mean, 1.0, 1e-9);
  EXPECT_NEAR(report.mae.mean, 0.0, 1e-9);
  EXPECT_NEAR(report.rmse.mean, 0.0, 1e-9);
  EXPECT_EQ(report.model, "lr");
}

TEST(CrossValidate, HandComputedTreeFolds) {
  // fold 0 trains on x=3,4 (y=2,6) and predicts 2 for x=1,2;
  // fold 1 trains on x=1,2 (y=1,3) and predicts 3 for x=3,4.
  const auto X = m::FeatureMatrix::from_rows({{1}, {2}, {3}, {4}});
  const std::vector<double> y = {1, 3, 2, 6};
  const auto r = ev::cross_validate(m::ModelSpec::defaults(m::Algorithm::dtr), X, y,
                                    ev::kfold(4, 2, false));
  ASSERT_EQ(r.fold_count(), 2u);
  EXPECT_DOUBLE_EQ(*r.mae.folds[0], 1.0);
  EXPECT_DOUBLE_EQ(*r.rmse.folds[0], 1.0);
  EXPECT_DOUBLE_EQ(*r.r2.folds[0], 0.0);
  EXPECT_DOUBLE_EQ(*r.mae.folds[1], 2.0);
  EXPECT_DOUBLE_EQ(*r.rmse.folds[1], std::sqrt(5.0));
  EXPECT_DOUBLE_EQ(*r.r2.folds[1], -0.25);
  EXPECT_DOUBLE_EQ(r.mae.mean, 1.5);
  EXPECT_DOUBLE_EQ(r.mae.sd, 0.5);
  EXPECT_DOUBLE_EQ(*r.mae_rel.folds[0], 0.5);
}

TEST(CrossValidate, ConstantFoldExcludedFromR2) {
  const auto X = m::FeatureMatrix::from_rows({{1}, {2}, {3}, {4}, {5}, {6}});
  const std::vector<double> y = {5, 5, 1, 2, 3, 9};
  const auto r = ev::cross_validate(m::ModelSpec::defaults(m::Algorithm::lr), X, y,
                                    ev::kfold(6, 3, false));
  EXPECT_FALSE(r.r2.folds[0].has_value());
  EXPECT_EQ(r.r2.n_excluded, 1u);
  EXPECT_NEAR(r.r2.mean, (*r.r2.folds[1] + *r.r2.folds[2]) / 2, 1e-12);
  EXPECT_TRUE(r.mae.folds[0].has_value());
}

TEST(CrossValidate, MeansAndInvariants) {
  sb::SplitMix64 rng(2);
  std::vector<std::vector<double>> rows;
  std::vector<double> y;
  for (int i = 0; i < 137; ++i) {
    const double a = rng.uniform(0, 10);
    rows.push_back({a, rng.uniform(0, 1)});
    y.push_back(std::sin(a) * 50 + 400 + rng.normal(0, 5));
  }
  const auto X = m::FeatureMatrix::from_rows(rows);
  const auto plan = ev::kfold(137, 10, true, 3);
  for (m::Algorithm a : m::kAllAlgorithms) {
    auto spec = m::ModelSpec::defaults(a);
    spec.forest.n_estimators = 10;
    spec.boosting.n_estimators = 20;
    const auto r = ev::cross_validate(spec, X, y, plan);
    const auto again = ev::cross_validate(spec, X, y, plan);
    for (ev::Metric metric : ev::kAllMetrics) {
      const auto& s = r.metric(metric);
      double sum = 0;
      for (const auto& f : s.folds) sum += *f;
      EXPECT_NEAR(s.mean, sum / s.folds.size(), 1e-12);
      EXPECT_EQ(s.folds, again.metric(metric).folds);
    }
    for (std::size_t f = 0; f < 10; ++f) {
      EXPECT_GE(*r.rmse.folds[f], *r.mae.folds[f]);
      EXPECT_GE(*r.mae.folds[f], 0.0);
    }
  }
}

TEST(CrossValidate, OutOfRangePlanThrows) {
  const auto X = m::FeatureMatrix::from_rows({{1}, {2}, {3}});
  EXPECT_THROW(ev::cross_validate(m::ModelSpec::defaults(m::Algorithm::lr), X,
                                  {1, 2, 3}, ev::kfold(5, 2)),
               sb::FoldError);
}

TEST(ScoreRows, LongFormLayout) {
  const auto X = m::FeatureMatrix::from_rows({{1}, {2}, {3}, {4}});
  auto r = ev::cross_validate(m::ModelSpec::defaults(m::Algorithm::dtr), X, {1, 3, 2, 6},
                              ev::kfold(4, 2, false));
  r.config = "4444";
  EXPECT_EQ(ev::score_header(2),
            (sb::csv::Row{"config", "model", "metric", "fold_0", "fold_1", "mean", "sd",
                          "n_excluded_folds"}));
  const auto rows = ev::score_rows(r);
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0], (sb::csv::Row{"4444", "dtr", "r2", "0", "-0.25", "-0.125", "0.125",
                                  "0"}));
  EXPECT_EQ(rows[1][2], "mae");
  EXPECT_EQ(rows[1][5], "1.5");
}
