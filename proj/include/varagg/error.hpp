// Copyright 2026 The varagg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
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

namespace varagg {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Broken structural invariant: unresolved definition, undeclared node id.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// A caller violated a documented precondition (e.g. a non-perfect matching
/// passed to block triangularization).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Error raised while evaluating or folding an expression. `path()` locates
/// the offending node as a sequence of child indices from the root, e.g.
/// "$.1.0", with "@name" marking descent into a defined entry.
class ExpressionError : public Error {
 public:
  ExpressionError(const std::string& what, std::string path)
      : Error(what + " at " + path), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class FoldError : public ExpressionError {
 public:
  using ExpressionError::ExpressionError;
};

class EvalError : public ExpressionError {
 public:
  enum class Kind { kMissingAssignment, kDomain };

  EvalError(Kind kind, const std::string& what, std::string path)
      : ExpressionError(what, std::move(path)), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Malformed model document. Line and column are 1-based; zero when the
/// error is semantic rather than syntactic.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error(line == 0 ? what
                        : "line " + std::to_string(line) + ", column " +
                              std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Semantically invalid model: unknown variable, duplicate name, lb > ub.
class ModelError : public Error {
 public:
  using Error::Error;
};

class TransformError : public Error {
 public:
  using Error::Error;
};

/// Pivot coefficient of the eliminated variable is (numerically) zero.
class ZeroPivotError : public TransformError {
 public:
  using TransformError::TransformError;
};

/// The pairs handed to the solver do not admit a lower triangular order.
class NotTriangularError : public TransformError {
 public:
  using TransformError::TransformError;
};

}  // namespace varagg
