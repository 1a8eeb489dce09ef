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

// Brute-force reference implementations used to check the library. None of
// these call into the library's graph or linearity code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "varagg/varagg.hpp"

namespace oracle {

/// Dense bipartite structure: adj[v][c] != 0 iff variable v is in constraint c.
struct Dense {
  int nv = 0;
  int nc = 0;
  std::vector<std::vector<char>> adj;
};

inline Dense random_dense(std::mt19937_64& rng, int nv, int nc, double density) {
  Dense d{nv, nc, std::vector<std::vector<char>>(nv, std::vector<char>(nc, 0))};
  std::bernoulli_distribution edge(density);
  for (int v = 0; v < nv; ++v)
    for (int c = 0; c < nc; ++c) d.adj[v][c] = edge(rng) ? 1 : 0;
  return d;
}

/// Maximum matching size by exhaustive search over constraint choices.
inline int max_matching_size(const Dense& d) {
  std::vector<char> used(d.nc, 0);
  int best = 0;
  auto rec = [&](auto&& self, int v, int size) -> void {
    if (size + (d.nv - v) <= best) return;
    if (v == d.nv) {
      best = std::max(best, size);
      return;
    }
    for (int c = 0; c < d.nc; ++c)
      if (d.adj[v][c] && !used[c]) {
        used[c] = 1;
        self(self, v + 1, size + 1);
        used[c] = 0;
      }
    self(self, v + 1, size);
  };
  rec(rec, 0, 0);
  return best;
}

/// Size of the matching found by a first-fit greedy pass.
inline int greedy_matching_size(const Dense& d) {
  std::vector<char> used(d.nc, 0);
  int n = 0;
  for (int v = 0; v < d.nv; ++v)
    for (int c = 0; c < d.nc; ++c)
      if (d.adj[v][c] && !used[c]) {
        used[c] = 1;
        ++n;
        break;
      }
  return n;
}

/// Finest block lower triangular partition of a square system with the
/// pairing (variable k, constraint k), found by trying every ordering of
/// the pairs. A cut after position p is admissible when no constraint
/// placed at or before p uses a variable placed after p. Blocks are
/// returned as sets of pair indices, sorted for comparison.
inline std::vector<std::set<int>> finest_blocks(const std::vector<std::vector<char>>& a) {
  // a[c][v]: constraint c of pair c uses variable v of pair v.
  const int n = static_cast<int>(a.size());
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::set<int>> best;
  do {
    std::vector<std::set<int>> blocks;
    std::set<int> current;
    for (int p = 0; p < n; ++p) {
      current.insert(perm[p]);
      bool cut = true;
      for (int i = 0; i <= p && cut; ++i)
        for (int j = p + 1; j < n; ++j)
          if (a[perm[i]][perm[j]]) {
            cut = false;
            break;
          }
      if (cut) {
        blocks.push_back(current);
        current.clear();
      }
    }
    if (blocks.size() > best.size()) best = blocks;
  } while (std::next_permutation(perm.begin(), perm.end()));
  std::sort(best.begin(), best.end());
  return best;
}

// ---------------------------------------------------------------------------
// Expression-tree recounts. Plain recursion, definitions expanded inline.

inline void collect_vars(const varagg::Expression& e, const varagg::DefinitionTable& defs,
                         std::set<std::uint32_t>& out) {
  using varagg::Op;
  switch (e.op()) {
    case Op::kConstant: return;
    case Op::kVariable: out.insert(e.variable_id().value); return;
    case Op::kDefined: collect_vars(defs.expression(e.defined_id()), defs, out); return;
    default:
      for (int i = 0; i < e.arity(); ++i) collect_vars(e.child(i), defs, out);
  }
}

inline std::set<std::uint32_t> vars_of(const varagg::Expression& e,
                                       const varagg::DefinitionTable& defs) {
  std::set<std::uint32_t> s;
  collect_vars(e, defs, s);
  return s;
}

/// 0 = absent, 1 = linear with a constant coefficient, 2 = anything else.
/// Coefficient constancy is judged by the other factor having no variables.
inline int degree_class(const varagg::Expression& e, std::uint32_t x,
                        const varagg::DefinitionTable& defs) {
  using varagg::Op;
  auto has = [&](const varagg::Expression& s) { return vars_of(s, defs).count(x) > 0; };
  auto free_of_vars = [&](const varagg::Expression& s) { return vars_of(s, defs).empty(); };
  switch (e.op()) {
    case Op::kConstant: return 0;
    case Op::kVariable: return e.variable_id().value == x ? 1 : 0;
    case Op::kDefined: return degree_class(defs.expression(e.defined_id()), x, defs);
    case Op::kNeg: return degree_class(e.lhs(), x, defs);
    case Op::kAdd:
    case Op::kSub:
      return std::max(degree_class(e.lhs(), x, defs), degree_class(e.rhs(), x, defs));
    case Op::kMul: {
      const bool l = has(e.lhs()), r = has(e.rhs());
      if (!l && !r) return 0;
      if (l && r) return 2;
      const auto& with = l ? e.lhs() : e.rhs();
      const auto& other = l ? e.rhs() : e.lhs();
      return free_of_vars(other) ? degree_class(with, x, defs) : 2;
    }
    case Op::kDiv: {
      if (has(e.rhs())) return 2;
      if (!has(e.lhs())) return 0;
      return free_of_vars(e.rhs()) ? degree_class(e.lhs(), x, defs) : 2;
    }
    default:
      return has(e) ? 2 : 0;
  }
}

struct Recount {
  std::size_t nnz = 0;
  std::size_t lin_nnz = 0;
  std::size_t max_degree = 0;
  std::size_t n_con = 0;
};

inline Recount recount(const varagg::Model& m) {
  Recount r;
  for (const auto* list : {&m.equalities, &m.inequalities})
    for (const auto& c : *list) {
      const auto vs = vars_of(c.expr, m.defs);
      r.nnz += vs.size();
      r.max_degree = std::max(r.max_degree, vs.size());
      for (auto v : vs)
        if (degree_class(c.expr, v, m.defs) == 1) ++r.lin_nnz;
      ++r.n_con;
    }
  return r;
}

// ---------------------------------------------------------------------------
// Numerics

inline bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

/// Central difference of e in direction x at the assignment.
inline double central_difference(const varagg::Expression& e, varagg::VariableId x,
                                 varagg::Assignment at,
                                 const varagg::DefinitionTable& defs, double h) {
  const double x0 = at.get(x);
  at.set(x, x0 + h);
  const double up = varagg::evaluate(e, at, defs);
  at.set(x, x0 - h);
  const double down = varagg::evaluate(e, at, defs);
  return (up - down) / (2 * h);
}

}  // namespace oracle
