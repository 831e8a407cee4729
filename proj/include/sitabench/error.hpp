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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sitabench {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. `line` and `column` are 1-based; 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0,
             std::size_t column = 0)
      : Error(line == 0 ? what
                        : what + " (line " + std::to_string(line) +
                              ", column " + std::to_string(column) + ")"),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Invalid configuration value. `position` is 1-based when the error refers
/// to one character of a config string, 0 otherwise.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what, std::size_t position = 0)
      : Error(what), position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class EncodeError : public Error {
 public:
  using Error::Error;
};

/// The CO2 target was deleted by the privacy transformation.
class TargetMissingError : public EncodeError {
 public:
  using EncodeError::EncodeError;
};

class FitError : public Error {
 public:
  using Error::Error;
};

class PredictError : public Error {
 public:
  using Error::Error;
};

class SplitError : public Error {
 public:
  using Error::Error;
};

class FoldError : public Error {
 public:
  using Error::Error;
};

/// R^2 requested on a target with zero variance.
class UndefinedVarianceError : public Error {
 public:
  using Error::Error;
};

class ClusteringError : public Error {
 public:
  using Error::Error;
};

}  // namespace sitabench
