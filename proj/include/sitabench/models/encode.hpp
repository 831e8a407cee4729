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

// Turns private records into a numeric feature matrix and the CO2 target.
//
// Candidate features, in column order: room, zone (categorical), the date
// components year, month, day, the time components hour, minute, second,
// then temperature, humidity, brightness and, on request, occupancy.
// A column deleted in every record is dropped.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "sitabench/error.hpp"
#include "sitabench/sita.hpp"
#include "sitabench/text.hpp"

namespace sitabench::models {

enum class ColumnKind { numeric, categorical };

/// Row-major numeric matrix with named columns.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
  std::vector<std::string> names;
  std::vector<ColumnKind> kinds;

  FeatureMatrix() = default;
  FeatureMatrix(std::size_t n_rows, std::vector<std::string> column_names,
                std::vector<ColumnKind> column_kinds = {})
      : rows(n_rows),
        cols(column_names.size()),
        values(n_rows * column_names.size(), 0.0),
        names(std::move(column_names)),
        kinds(std::move(column_kinds)) {
    if (kinds.empty()) kinds.assign(cols, ColumnKind::numeric);
  }

  /// Builds a numeric matrix from nested rows; columns are named x0, x1, ...
  static FeatureMatrix from_rows(
      const std::vector<std::vector<double>>& data) {
    const std::size_t p = data.empty() ? 0 : data.front().size();
    std::vector<std::string> names;
    for (std::size_t j = 0; j < p; ++j) names.push_back("x" + std::to_string(j));
    FeatureMatrix m(data.size(), std::move(names));
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (data[i].size() != p) throw EncodeError("ragged feature rows");
      std::copy(data[i].begin(), data[i].end(), m.values.begin() + i * p);
    }
    return m;
  }

  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }

  std::span<const double> row(std::size_t r) const {
    return {values.data() + r * cols, cols};
  }

  FeatureMatrix select_rows(std::span<const std::size_t> index) const {
    FeatureMatrix out(index.size(), names, kinds);
    for (std::size_t i = 0; i < index.size(); ++i) {
      const auto src = row(index[i]);
      std::copy(src.begin(), src.end(), out.values.begin() + i * cols);
    }
    return out;
  }

  bool all_finite() const {
    return std::all_of(values.begin(), values.end(),
                       [](double v) { return std::isfinite(v); });
  }
};

using TargetVector = std::vector<double>;

inline TargetVector select(const TargetVector& y,
                           std::span<const std::size_t> index) {
  TargetVector out;
  out.reserve(index.size());
  for (std::size_t i : index) out.push_back(y[i]);
  return out;
}

/// Per categorical column, category -> code. Code 0 is reserved for the
/// `deleted` token; observed categories take 1, 2, ... in sorted order.
class EncodingMap {
 public:
  void add_column(const std::string& column, std::vector<std::string> sorted) {
    std::vector<std::string> categories = {std::string(sita::kDeleted)};
    for (auto& c : sorted) {
      if (c != sita::kDeleted) categories.push_back(std::move(c));
    }
    columns_[column] = std::move(categories);
  }

  bool has_column(const std::string& column) const {
    return columns_.count(column) > 0;
  }

  int code(const std::string& column, const std::string& category) const {
    const auto& cats = categories(column);
    auto it = std::lower_bound(cats.begin() + 1, cats.end(), category);
    if (category == sita::kDeleted) return 0;
    if (it == cats.end() || *it != category) {
      throw EncodeError("unseen category '" + category + "' in column " +
                        column);
    }
    return static_cast<int>(it - cats.begin());
  }

  const std::string& decode(const std::string& column, int code) const {
    const auto& cats = categories(column);
    if (code < 0 || static_cast<std::size_t>(code) >= cats.size()) {
      throw EncodeError("code out of range in column " + column);
    }
    return cats[static_cast<std::size_t>(code)];
  }

  const std::vector<std::string>& categories(const std::string& column) const {
    auto it = columns_.find(column);
    if (it == columns_.end()) throw EncodeError("no categorical column " + column);
    return it->second;
  }

  const std::map<std::string, std::vector<std::string>>& columns() const {
    return columns_;
  }

 private:
  std::map<std::string, std::vector<std::string>> columns_;
};

enum class CategoricalEncoding { label, one_hot };

struct EncodePolicy {
  CategoricalEncoding categorical = CategoricalEncoding::label;
  bool include_occupancy = false;
  bool exclude_room = false;
  bool exclude_zone = false;
};

struct Encoded {
  FeatureMatrix X;
  TargetVector y;
  EncodingMap map;
};

namespace detail {

struct Column {
  std::string name;
  ColumnKind kind;
  std::vector<double> values;
};

inline int component(const std::string& digits, std::size_t pos,
                     std::size_t width) {
  int v = 0;
  for (std::size_t i = pos; i < pos + width; ++i) {
    if (i >= digits.size() || digits[i] < '0' || digits[i] > '9') {
      throw EncodeError("malformed date/time field '" + digits + "'");
    }
    v = v * 10 + (digits[i] - '0');
  }
  return v;
}

}  // namespace detail

inline Encoded encode(const std::vector<sita::PrivateRecord>& records,
                      const EncodePolicy& policy = {}) {
  using sita::PrivateField;
  using sita::PrivateRecord;
  const std::size_t n = records.size();
  Encoded out;
  out.y.reserve(n);
  for (const PrivateRecord& r : records) {
    if (r.co2.is_deleted()) {
      throw TargetMissingError(
          "CO2 target is deleted (activity level 0); nothing to predict");
    }
    out.y.push_back(r.co2.value());
  }

  std::vector<detail::Column> columns;

  auto categorical = [&](const std::string& name,
                         PrivateField<std::string> PrivateRecord::*field) {
    std::set<std::string> seen;
    bool any_value = false;
    for (const PrivateRecord& r : records) {
      const auto& f = r.*field;
      if (!f.is_deleted()) {
        seen.insert(f.value());
        any_value = true;
      }
    }
    if (!any_value) return;
    out.map.add_column(name, {seen.begin(), seen.end()});
    const auto& cats = out.map.categories(name);
    std::vector<double> codes(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& f = records[i].*field;
      codes[i] = f.is_deleted() ? 0.0 : out.map.code(name, f.value());
    }
    if (policy.categorical == CategoricalEncoding::label) {
      columns.push_back({name, ColumnKind::categorical, std::move(codes)});
      return;
    }
    const bool any_deleted =
        std::find(codes.begin(), codes.end(), 0.0) != codes.end();
    for (std::size_t c = any_deleted ? 0 : 1; c < cats.size(); ++c) {
      std::vector<double> indicator(n);
      for (std::size_t i = 0; i < n; ++i) {
        indicator[i] = codes[i] == static_cast<double>(c) ? 1.0 : 0.0;
      }
      columns.push_back(
          {name + "=" + cats[c], ColumnKind::categorical, std::move(indicator)});
    }
  };

  auto split_digits = [&](PrivateField<std::string> PrivateRecord::*field,
                          const char* what,
                          std::initializer_list<std::pair<const char*, std::size_t>>
                              parts) {
    const std::size_t deleted = static_cast<std::size_t>(std::count_if(
        records.begin(), records.end(),
        [&](const PrivateRecord& r) { return (r.*field).is_deleted(); }));
    if (deleted == n) return;
    if (deleted > 0) {
      throw EncodeError(std::string(what) + " is deleted in only some records");
    }
    std::size_t pos = 0;
    for (const auto& [name, width] : parts) {
      std::vector<double> v(n);
      for (std::size_t i = 0; i < n; ++i) {
        v[i] = detail::component((records[i].*field).value(), pos, width);
      }
      columns.push_back({name, ColumnKind::numeric, std::move(v)});
      pos += width;
    }
  };

  auto numeric = [&](const char* name,
                     PrivateField<double> PrivateRecord::*field) {
    const std::size_t deleted = static_cast<std::size_t>(std::count_if(
        records.begin(), records.end(),
        [&](const PrivateRecord& r) { return (r.*field).is_deleted(); }));
    if (deleted == n) return;
    if (deleted > 0) {
      throw EncodeError(std::string(name) + " is deleted in only some records");
    }
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = (records[i].*field).value();
    columns.push_back({name, ColumnKind::numeric, std::move(v)});
  };

  if (n > 0) {
    if (!policy.exclude_room) categorical("room", &PrivateRecord::room);
    if (!policy.exclude_zone) categorical("zone", &PrivateRecord::zone);
    split_digits(&PrivateRecord::date, "date",
                 {{"year", 4}, {"month", 2}, {"day", 2}});
    split_digits(&PrivateRecord::time, "time",
                 {{"hour", 2}, {"minute", 2}, {"second", 2}});
    numeric("temperature", &PrivateRecord::temperature);
    numeric("humidity", &PrivateRecord::humidity);
    numeric("brightness", &PrivateRecord::brightness);
    if (policy.include_occupancy) {
      std::vector<double> v(n);
      for (std::size_t i = 0; i < n; ++i) {
        if (!records[i].occupancy) {
          throw EncodeError("occupancy requested but missing in some records");
        }
        v[i] = *records[i].occupancy;
      }
      columns.push_back({"occupancy", ColumnKind::numeric, std::move(v)});
    }
  }

  std::vector<std::string> names;
  std::vector<ColumnKind> kinds;
  for (const auto& c : columns) {
    names.push_back(c.name);
    kinds.push_back(c.kind);
  }
  out.X = FeatureMatrix(n, std::move(names), std::move(kinds));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    for (std::size_t i = 0; i < n; ++i) out.X.at(i, j) = columns[j].values[i];
  }
  return out;
}

}  // namespace sitabench::models
