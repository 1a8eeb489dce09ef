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

// Synthetic models for tests and experiments.
//
// A "ladder" is a chain x0 -> x1 -> ... where each equality ties x_i to its
// predecessor, with occasional side couplings, fixed values and leaf
// variables defined from the chain. A "cycle" groups the x_i into small
// rings whose equalities reference the next member, producing non-trivial
// diagonal blocks. Linear couplings use unit coefficients and nonlinear
// terms are bounded, so values stay moderate whichever variables a strategy
// decides to eliminate.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "varagg/expr.hpp"
#include "varagg/model.hpp"

namespace varagg {

enum class GeneratorShape { kLadder, kCycle };

inline std::optional<GeneratorShape> parse_generator_shape(std::string_view s) {
  if (s == "ladder") return GeneratorShape::kLadder;
  if (s == "cycle") return GeneratorShape::kCycle;
  return std::nullopt;
}

struct GeneratorOptions {
  GeneratorShape shape = GeneratorShape::kLadder;
  std::size_t size = 20;            // number of chain equalities
  double nonlinear_fraction = 0.3;  // share of couplings with nonlinear terms
  std::uint64_t seed = 0;
};

namespace detail {

class ModelGenerator {
 public:
  explicit ModelGenerator(const GeneratorOptions& o) : opt_(o), rng_(o.seed) {}

  Model run() {
    const std::size_t n = std::max<std::size_t>(opt_.size, 1);
    for (std::size_t i = 0; i < n; ++i)
      x_.push_back(add_variable("x" + std::to_string(i)));
    const std::size_t n_inputs = std::max<std::size_t>(1, n / 5);
    for (std::size_t k = 0; k < n_inputs; ++k)
      u_.push_back(add_variable("u" + std::to_string(k)));

    if (opt_.shape == GeneratorShape::kLadder)
      ladder();
    else
      cycles();
    leaves();
    inequalities();
    objective();
    return std::move(m_);
  }

 private:
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng_);
  }
  bool chance(double p) { return uniform(0.0, 1.0) < p; }
  std::size_t pick(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_);
  }
  /// Offsets on a quarter grid keep the printed models readable.
  double offset() { return static_cast<double>(pick(9)) * 0.25 - 1.0; }
  double sign() { return chance(0.5) ? 1.0 : -1.0; }
  bool nonlinear() { return chance(opt_.nonlinear_fraction); }

  VariableId add_variable(std::string name) {
    double lb = -kInfinity;
    double ub = kInfinity;
    const double r = uniform(0.0, 1.0);
    if (r < 0.3) {
      lb = -50.0;
      ub = 50.0;
    } else if (r < 0.45) {
      lb = -40.0;
    } else if (r < 0.6) {
      ub = 40.0;
    }
    return m_.add_variable(std::move(name), lb, ub);
  }

  Expression side_term() {
    // Inputs or earlier chain members.
    if (chance(0.5) || ladder_pos_ < 2) return var(u_[pick(u_.size())]);
    return var(x_[pick(ladder_pos_ - 1)]);
  }

  void equality(Expression e) {
    m_.add_equality("e" + std::to_string(m_.equalities.size()), std::move(e));
  }

  void ladder() {
    for (std::size_t i = 0; i < x_.size(); ++i) {
      ladder_pos_ = i;
      const Expression xi = var(x_[i]);
      if (i == 0 || chance(0.08)) {
        const double b = offset();
        equality(xi - b);
        continue;
      }
      const Expression prev = var(x_[i - 1]);
      const bool nl = nonlinear();
      const std::size_t variant = nl ? pick(4) : pick(3);
      const double s = sign();
      const double b = offset();
      const Expression side = side_term();
      const double t = sign();
      const Expression input = var(u_[pick(u_.size())]);
      if (nl) {
        switch (variant) {
          case 0: equality(xi - s * prev - 0.5 * sin(side)); break;
          case 1: equality(xi + 0.5 * sin(xi) - s * prev - b); break;
          case 2: equality(xi - 0.5 * cos(prev) - b); break;
          default: equality(xi - s * prev - 0.25 * exp(0.5 * sin(prev * side))); break;
        }
      } else {
        switch (variant) {
          case 0: equality(xi - s * prev - b); break;
          case 1: equality(xi - s * prev - t * side); break;
          default: equality(xi - s * input - b); break;
        }
      }
    }
  }

  void cycles() {
    std::size_t i = 0;
    while (i < x_.size()) {
      const std::size_t len = std::min<std::size_t>(1 + pick(4), x_.size() - i);
      ladder_pos_ = i;
      for (std::size_t j = 0; j < len; ++j) {
        const Expression xj = var(x_[i + j]);
        const Expression next = var(x_[i + (j + 1) % len]);
        Expression e = xj;
        if (len > 1) e = nonlinear() ? e - 0.5 * sin(next) : e - 0.5 * next;
        if (i > 0 && chance(0.5)) e = e - 0.5 * var(x_[pick(i)]);
        const double b = offset();
        equality(e - b);
      }
      i += len;
    }
  }

  /// Leaf variables z = a*x + b with non-unit a; nothing else refers to them
  /// apart from inequalities and the objective.
  void leaves() {
    const std::size_t count = x_.size() / 6;
    static constexpr double kScales[] = {2.0, 0.5, 3.0, -2.0};
    for (std::size_t k = 0; k < count; ++k) {
      const VariableId z = add_variable("z" + std::to_string(k));
      z_.push_back(z);
      const Expression xi = var(x_[pick(x_.size())]);
      const double a = kScales[pick(4)];
      const bool nl = nonlinear();
      const double b = offset();
      equality(nl ? var(z) - a * pow(xi, 2.0) - b : var(z) - a * xi - b);
    }
  }

  Expression any_variable() {
    const std::size_t total = x_.size() + u_.size() + z_.size();
    const std::size_t k = pick(total);
    if (k < x_.size()) return var(x_[k]);
    if (k < x_.size() + u_.size()) return var(u_[k - x_.size()]);
    return var(z_[k - x_.size() - u_.size()]);
  }

  void inequalities() {
    const std::size_t count = std::max<std::size_t>(1, x_.size() / 5);
    for (std::size_t k = 0; k < count; ++k) {
      const bool sum = chance(0.5);
      const Expression a = any_variable();
      const Expression b = any_variable();
      m_.add_inequality("g" + std::to_string(k), sum ? a + b - 30.0 : a * b - 100.0);
    }
  }

  void objective() {
    Expression f = constant(0.0);
    const std::size_t terms = std::min<std::size_t>(x_.size(), 5);
    for (std::size_t k = 0; k < terms; ++k) {
      const Expression v = any_variable();
      const double t = offset();
      f = f + pow(v - t, 2.0);
    }
    m_.objective = f;
  }

  GeneratorOptions opt_;
  std::mt19937_64 rng_;
  Model m_;
  std::vector<VariableId> x_, u_, z_;
  std::size_t ladder_pos_ = 0;
};

}  // namespace detail

/// Deterministic for a given set of options.
inline Model generate_model(const GeneratorOptions& options) {
  return detail::ModelGenerator(options).run();
}

}  // namespace varagg
