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

// The five regressors behind one fit/predict contract, plus a versioned JSON
// form of a fitted model.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "sitabench/error.hpp"
#include "sitabench/models/encode.hpp"
#include "sitabench/models/ensemble.hpp"
#include "sitabench/models/linear.hpp"
#include "sitabench/models/tree.hpp"

namespace sitabench::models {

enum class Algorithm { lr, rr, dtr, rf, gbr };

inline constexpr Algorithm kAllAlgorithms[] = {Algorithm::lr, Algorithm::rr,
                                               Algorithm::dtr, Algorithm::rf,
                                               Algorithm::gbr};

inline std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::lr: return "lr";
    case Algorithm::rr: return "rr";
    case Algorithm::dtr: return "dtr";
    case Algorithm::rf: return "rf";
    case Algorithm::gbr: return "gbr";
  }
  return "unknown";
}

inline Algorithm parse_algorithm(std::string_view name) {
  for (Algorithm a : kAllAlgorithms) {
    if (to_string(a) == name) return a;
  }
  throw ConfigError("unknown model '" + std::string(name) +
                    "' (expected lr, rr, dtr, rf or gbr)");
}

/// Hyperparameters for every algorithm; only the block matching `algorithm`
/// is read. Defaults: ridge alpha 1; unlimited CART trees; 100 bootstrapped
/// trees considering every feature; 100 boosting stages of depth 3 at
/// learning rate 0.1.
struct ModelSpec {
  Algorithm algorithm = Algorithm::lr;
  double alpha = 1.0;
  TreeParams tree;
  ForestParams forest;
  BoostingParams boosting;
  std::uint64_t seed = 10;

  static ModelSpec defaults(Algorithm a, std::uint64_t seed = 10) {
    ModelSpec spec;
    spec.algorithm = a;
    spec.seed = seed;
    return spec;
  }

  void validate() const {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
      throw ConfigError("alpha must be finite and >= 0");
    }
    tree.validate();
    forest.tree.validate();
    if (forest.n_estimators == 0) throw ConfigError("forest needs >= 1 tree");
    if (!(boosting.learning_rate > 0.0) || boosting.learning_rate > 1.0) {
      throw ConfigError("learning_rate must lie in (0, 1]");
    }
    if (boosting.max_depth < 1) throw ConfigError("boosting depth must be >= 1");
  }
};

using ModelState = std::variant<LinearModel, RegressionTree, Forest, Boosting>;

struct TrainedModel {
  Algorithm algorithm = Algorithm::lr;
  ModelSpec spec;
  std::vector<std::string> feature_names;
  ModelState state;

  double predict_row(std::span<const double> x) const {
    return std::visit([&](const auto& m) { return m.predict_row(x); }, state);
  }
};

inline TrainedModel fit(const ModelSpec& spec, const FeatureMatrix& X,
                        const TargetVector& y) {
  if (X.rows == 0 || X.cols == 0) {
    throw FitError("cannot fit on a degenerate feature matrix (" +
                   std::to_string(X.rows) + " x " + std::to_string(X.cols) +
                   ")");
  }
  if (X.rows < 2) throw FitError("need at least 2 training rows");
  if (y.size() != X.rows) throw FitError("target length does not match rows");
  if (!X.all_finite()) throw FitError("feature matrix has non-finite entries");
  for (double v : y) {
    if (!std::isfinite(v)) throw FitError("target has non-finite entries");
  }
  try {
    spec.validate();
  } catch (const ConfigError& e) {
    throw FitError(e.what());
  }

  TrainedModel model{spec.algorithm, spec, X.names, LinearModel{}};
  switch (spec.algorithm) {
    case Algorithm::lr: model.state = fit_linear(X, y, 0.0); break;
    case Algorithm::rr: model.state = fit_linear(X, y, spec.alpha); break;
    case Algorithm::dtr: {
      const ColumnData data(X);
      SplitMix64 rng = SplitMix64::stream(spec.seed, 0);
      model.state = build_tree(data, y, {}, spec.tree, rng);
      break;
    }
    case Algorithm::rf:
      model.state = fit_forest(X, y, spec.forest, spec.seed);
      break;
    case Algorithm::gbr:
      model.state = fit_boosting(X, y, spec.boosting, spec.seed);
      break;
  }
  return model;
}

inline TargetVector predict(const TrainedModel& model, const FeatureMatrix& X) {
  if (X.names != model.feature_names) {
    throw PredictError("feature schema does not match the training schema");
  }
  TargetVector out(X.rows);
  for (std::size_t i = 0; i < X.rows; ++i) out[i] = model.predict_row(X.row(i));
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

inline constexpr int kModelFormatVersion = 1;

namespace detail {

inline nlohmann::json tree_params_json(const TreeParams& t) {
  return {{"max_depth", t.max_depth},
          {"min_samples_split", t.min_samples_split},
          {"min_samples_leaf", t.min_samples_leaf},
          {"max_features", t.max_features}};
}

inline TreeParams tree_params_from(const nlohmann::json& j) {
  TreeParams t;
  t.max_depth = j.at("max_depth").get<int>();
  t.min_samples_split = j.at("min_samples_split").get<std::size_t>();
  t.min_samples_leaf = j.at("min_samples_leaf").get<std::size_t>();
  t.max_features = j.at("max_features").get<std::size_t>();
  return t;
}

inline nlohmann::json tree_json(const RegressionTree& t) {
  return {{"n_features", t.n_features}, {"feature", t.feature},
          {"threshold", t.threshold},   {"left", t.left},
          {"right", t.right},           {"value", t.value}};
}

inline RegressionTree tree_from(const nlohmann::json& j) {
  RegressionTree t;
  t.n_features = j.at("n_features").get<std::size_t>();
  t.feature = j.at("feature").get<std::vector<std::int32_t>>();
  t.threshold = j.at("threshold").get<std::vector<double>>();
  t.left = j.at("left").get<std::vector<std::int32_t>>();
  t.right = j.at("right").get<std::vector<std::int32_t>>();
  t.value = j.at("value").get<std::vector<double>>();
  const std::size_t nodes = t.value.size();
  if (nodes == 0 || t.feature.size() != nodes || t.threshold.size() != nodes ||
      t.left.size() != nodes || t.right.size() != nodes) {
    throw ParseError("inconsistent tree arrays");
  }
  for (std::size_t i = 0; i < nodes; ++i) {
    if (t.feature[i] < 0) continue;
    if (static_cast<std::size_t>(t.feature[i]) >= t.n_features ||
        t.left[i] <= static_cast<std::int32_t>(i) ||
        t.right[i] <= static_cast<std::int32_t>(i) ||
        static_cast<std::size_t>(t.left[i]) >= nodes ||
        static_cast<std::size_t>(t.right[i]) >= nodes) {
      throw ParseError("invalid tree node " + std::to_string(i));
    }
  }
  return t;
}

}  // namespace detail

inline nlohmann::json to_json(const TrainedModel& m) {
  const ModelSpec& s = m.spec;
  nlohmann::json hyper;
  switch (m.algorithm) {
    case Algorithm::lr: hyper = nlohmann::json::object(); break;
    case Algorithm::rr: hyper = {{"alpha", s.alpha}}; break;
    case Algorithm::dtr: hyper = detail::tree_params_json(s.tree); break;
    case Algorithm::rf:
      hyper = {{"n_estimators", s.forest.n_estimators},
               {"bootstrap", s.forest.bootstrap},
               {"tree", detail::tree_params_json(s.forest.tree)}};
      break;
    case Algorithm::gbr:
      hyper = {{"n_estimators", s.boosting.n_estimators},
               {"learning_rate", s.boosting.learning_rate},
               {"max_depth", s.boosting.max_depth},
               {"min_samples_split", s.boosting.min_samples_split},
               {"min_samples_leaf", s.boosting.min_samples_leaf}};
      break;
  }
  nlohmann::json state;
  std::visit(
      [&](const auto& st) {
        using T = std::decay_t<decltype(st)>;
        if constexpr (std::is_same_v<T, LinearModel>) {
          state = {{"coefficients", st.coefficients},
                   {"intercept", st.intercept}};
        } else if constexpr (std::is_same_v<T, RegressionTree>) {
          state = {{"tree", detail::tree_json(st)}};
        } else if constexpr (std::is_same_v<T, Forest>) {
          auto trees = nlohmann::json::array();
          for (const auto& t : st.trees) trees.push_back(detail::tree_json(t));
          state = {{"trees", trees}};
        } else {
          auto trees = nlohmann::json::array();
          for (const auto& t : st.trees) trees.push_back(detail::tree_json(t));
          state = {{"initial", st.initial},
                   {"learning_rate", st.learning_rate},
                   {"trees", trees}};
        }
      },
      m.state);
  return {{"format", "sitabench-model"},
          {"version", kModelFormatVersion},
          {"algorithm", std::string(to_string(m.algorithm))},
          {"seed", s.seed},
          {"hyperparameters", hyper},
          {"features", m.feature_names},
          {"state", state}};
}

inline TrainedModel model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "sitabench-model") {
      throw ParseError("not a sitabench model document");
    }
    if (j.at("version").get<int>() != kModelFormatVersion) {
      throw ParseError("unsupported model format version " +
                       j.at("version").dump());
    }
    TrainedModel m;
    m.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
    m.spec = ModelSpec::defaults(m.algorithm, j.at("seed").get<std::uint64_t>());
    m.feature_names = j.at("features").get<std::vector<std::string>>();
    const auto& h = j.at("hyperparameters");
    const auto& st = j.at("state");
    switch (m.algorithm) {
      case Algorithm::lr:
      case Algorithm::rr: {
        if (m.algorithm == Algorithm::rr) m.spec.alpha = h.at("alpha").get<double>();
        LinearModel lm;
        lm.coefficients = st.at("coefficients").get<std::vector<double>>();
        lm.intercept = st.at("intercept").get<double>();
        if (lm.coefficients.size() != m.feature_names.size()) {
          throw ParseError("coefficient count does not match features");
        }
        m.state = lm;
        break;
      }
      case Algorithm::dtr:
        m.spec.tree = detail::tree_params_from(h);
        m.state = detail::tree_from(st.at("tree"));
        break;
      case Algorithm::rf: {
        m.spec.forest.n_estimators = h.at("n_estimators").get<std::size_t>();
        m.spec.forest.bootstrap = h.at("bootstrap").get<bool>();
        m.spec.forest.tree = detail::tree_params_from(h.at("tree"));
        Forest f;
        for (const auto& t : st.at("trees")) f.trees.push_back(detail::tree_from(t));
        if (f.trees.empty()) throw ParseError("forest without trees");
        m.state = std::move(f);
        break;
      }
      case Algorithm::gbr: {
        m.spec.boosting.n_estimators = h.at("n_estimators").get<std::size_t>();
        m.spec.boosting.learning_rate = h.at("learning_rate").get<double>();
        m.spec.boosting.max_depth = h.at("max_depth").get<int>();
        m.spec.boosting.min_samples_split =
            h.at("min_samples_split").get<std::size_t>();
        m.spec.boosting.min_samples_leaf =
            h.at("min_samples_leaf").get<std::size_t>();
        Boosting b;
        b.initial = st.at("initial").get<double>();
        b.learning_rate = st.at("learning_rate").get<double>();
        for (const auto& t : st.at("trees")) b.trees.push_back(detail::tree_from(t));
        m.state = std::move(b);
        break;
      }
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid model document: ") + e.what());
  }
}

}  // namespace sitabench::models
