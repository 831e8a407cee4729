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

// Least squares and ridge regression with an unpenalized intercept.
//
// Both solve on centred data. Ordinary least squares uses the normal
// equations while they are well conditioned and falls back to the
// minimum-norm solution (complete orthogonal decomposition of the centred
// design) when the Gram matrix is rank deficient, which happens whenever a
// generalized column is constant.

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sitabench/error.hpp"
#include "sitabench/models/encode.hpp"

namespace sitabench::models {

struct LinearModel {
  std::vector<double> coefficients;
  double intercept = 0.0;
  bool min_norm_fallback = false;

  double predict_row(std::span<const double> x) const {
    double v = intercept;
    for (std::size_t j = 0; j < coefficients.size(); ++j) {
      v += coefficients[j] * x[j];
    }
    return v;
  }

  friend bool operator==(const LinearModel&, const LinearModel&) = default;
};

/// alpha == 0 gives ordinary least squares.
inline LinearModel fit_linear(const FeatureMatrix& X, const TargetVector& y,
                              double alpha) {
  if (alpha < 0 || !std::isfinite(alpha)) {
    throw FitError("ridge alpha must be finite and >= 0");
  }
  const auto n = static_cast<Eigen::Index>(X.rows);
  const auto p = static_cast<Eigen::Index>(X.cols);
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                 Eigen::RowMajor>>
      A(X.values.data(), n, p);
  Eigen::Map<const Eigen::VectorXd> b(y.data(), n);

  const Eigen::RowVectorXd x_mean = A.colwise().mean();
  const double y_mean = b.mean();
  const Eigen::MatrixXd Ac = A.rowwise() - x_mean;
  const Eigen::VectorXd bc = b.array() - y_mean;

  Eigen::MatrixXd gram = Ac.transpose() * Ac;
  const Eigen::VectorXd rhs = Ac.transpose() * bc;
  Eigen::VectorXd w;
  bool fallback = false;
  if (alpha > 0) {
    gram.diagonal().array() += alpha;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    w = ldlt.solve(rhs);
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram,
                                                         Eigen::EigenvaluesOnly);
    const auto& lambda = eig.eigenvalues();
    const double top = lambda.size() > 0 ? lambda.maxCoeff() : 0.0;
    if (top > 0.0 && lambda.minCoeff() > 1e-10 * top) {
      w = gram.llt().solve(rhs);
    } else {
      fallback = true;
      Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(Ac);
      w = cod.solve(bc);
    }
  }

  LinearModel model;
  model.coefficients.assign(w.data(), w.data() + w.size());
  model.intercept = y_mean - x_mean.dot(w);
  model.min_norm_fallback = fallback;
  return model;
}

}  // namespace sitabench::models
