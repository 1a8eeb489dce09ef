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

// Bipartite variable/constraint incidence graphs, maximum matching and
// irreducible block triangularization of a perfectly matched graph.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "varagg/error.hpp"
#include "varagg/expr_ops.hpp"
#include "varagg/model.hpp"

namespace varagg {

struct IncidenceEdge {
  std::uint32_t var;  // position in IncidenceGraph::vars()
  std::uint32_t con;  // position in IncidenceGraph::cons()
  bool linear;
};

/// Bipartite graph between variable and constraint nodes. Node order is the
/// order given at construction; edges are kept in insertion order and every
/// adjacency list follows it.
class IncidenceGraph {
 public:
  IncidenceGraph() = default;
  IncidenceGraph(std::vector<VariableId> vars, std::vector<ConstraintId> cons)
      : vars_(std::move(vars)), cons_(std::move(cons)),
        var_adj_(vars_.size()), con_adj_(cons_.size()) {
    for (std::size_t i = 0; i < vars_.size(); ++i)
      if (!var_pos_.emplace(vars_[i], static_cast<std::uint32_t>(i)).second)
        throw ContractError("duplicate variable node");
    for (std::size_t i = 0; i < cons_.size(); ++i)
      if (!con_pos_.emplace(cons_[i], static_cast<std::uint32_t>(i)).second)
        throw ContractError("duplicate constraint node");
  }

  void add_edge(VariableId v, ConstraintId c, bool linear) {
    add_edge_at(var_position(v).value(), con_position(c).value(), linear);
  }

  void add_edge_at(std::uint32_t var, std::uint32_t con, bool linear) {
    if (!edge_pos_.emplace(key(var, con), static_cast<std::uint32_t>(edges_.size()))
             .second)
      throw ContractError("duplicate edge");
    var_adj_[var].push_back(static_cast<std::uint32_t>(edges_.size()));
    con_adj_[con].push_back(static_cast<std::uint32_t>(edges_.size()));
    edges_.push_back(IncidenceEdge{var, con, linear});
  }

  std::span<const VariableId> vars() const { return vars_; }
  std::span<const ConstraintId> cons() const { return cons_; }
  std::span<const IncidenceEdge> edges() const { return edges_; }

  /// Edge indices incident to a node.
  std::span<const std::uint32_t> var_edges(std::uint32_t var) const {
    return var_adj_[var];
  }
  std::span<const std::uint32_t> con_edges(std::uint32_t con) const {
    return con_adj_[con];
  }

  std::optional<std::uint32_t> var_position(VariableId v) const {
    auto it = var_pos_.find(v);
    if (it == var_pos_.end()) return std::nullopt;
    return it->second;
  }
  std::optional<std::uint32_t> con_position(ConstraintId c) const {
    auto it = con_pos_.find(c);
    if (it == con_pos_.end()) return std::nullopt;
    return it->second;
  }

  const IncidenceEdge* find_edge(VariableId v, ConstraintId c) const {
    const auto vp = var_position(v);
    const auto cp = con_position(c);
    if (!vp || !cp) return nullptr;
    auto it = edge_pos_.find(key(*vp, *cp));
    return it == edge_pos_.end() ? nullptr : &edges_[it->second];
  }

  std::size_t linear_edge_count() const {
    return static_cast<std::size_t>(std::count_if(
        edges_.begin(), edges_.end(), [](const auto& e) { return e.linear; }));
  }

 private:
  static std::uint64_t key(std::uint32_t v, std::uint32_t c) {
    return (static_cast<std::uint64_t>(v) << 32) | c;
  }

  std::vector<VariableId> vars_;
  std::vector<ConstraintId> cons_;
  std::vector<IncidenceEdge> edges_;
  std::vector<std::vector<std::uint32_t>> var_adj_;
  std::vector<std::vector<std::uint32_t>> con_adj_;
  std::unordered_map<VariableId, std::uint32_t> var_pos_;
  std::unordered_map<ConstraintId, std::uint32_t> con_pos_;
  std::unordered_map<std::uint64_t, std::uint32_t> edge_pos_;
};

struct MatchedEdge {
  VariableId var;
  ConstraintId con;

  friend bool operator==(const MatchedEdge&, const MatchedEdge&) = default;
};

using Matching = std::vector<MatchedEdge>;

/// Ordered partition of a perfect matching; each block is one diagonal block
/// of the block lower triangular permutation.
using BlockPartition = std::vector<std::vector<MatchedEdge>>;

/// No shared nodes and every pair an edge of `g`.
inline bool is_valid_matching(const IncidenceGraph& g, const Matching& m) {
  std::unordered_set<VariableId> vs;
  std::unordered_set<ConstraintId> cs;
  for (const auto& e : m) {
    if (!vs.insert(e.var).second || !cs.insert(e.con).second) return false;
    if (!g.find_edge(e.var, e.con)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Graph construction

namespace detail {

inline IncidenceGraph build_incidence(std::span<const VariableId> vars,
                                      std::span<const ConstraintId> cons,
                                      const Model& model, bool linear_only) {
  const ModelIndex index(model);
  for (VariableId v : vars)
    if (!index.has_variable(v))
      throw StructuralError("variable #" + std::to_string(v.value) +
                            " is not declared in the model");
  std::vector<const Constraint*> rows;
  rows.reserve(cons.size());
  for (ConstraintId c : cons) {
    const Constraint* row = index.find_constraint(c);
    if (!row)
      throw StructuralError("constraint #" + std::to_string(c.value) +
                            " is not declared in the model");
    rows.push_back(row);
  }

  IncidenceGraph g(std::vector<VariableId>(vars.begin(), vars.end()),
                   std::vector<ConstraintId>(cons.begin(), cons.end()));
  for (std::size_t ci = 0; ci < rows.size(); ++ci) {
    const Expression& e = rows[ci]->expr;
    const LinearForm form = linear_form(e, model.defs);
    for (VariableId v : all_vars(e, model.defs)) {
      const auto vp = g.var_position(v);
      if (!vp) continue;
      const LinClass cls = form.classify(v);
      const bool linear =
          cls.is_linear() && std::abs(cls.coefficient) > kCoefficientTolerance;
      if (linear_only && !linear) continue;
      g.add_edge_at(*vp, static_cast<std::uint32_t>(ci), linear);
    }
  }
  return g;
}

}  // namespace detail

/// Incidence of `vars` in `cons`: edge (x, c) iff x participates in c, tagged
/// linear iff x is in linear_vars(c). Variables outside `vars` are ignored.
inline IncidenceGraph bipartite_graph(std::span<const VariableId> vars,
                                      std::span<const ConstraintId> cons,
                                      const Model& model) {
  return detail::build_incidence(vars, cons, model, false);
}

/// As bipartite_graph, keeping only linear edges.
inline IncidenceGraph linear_bipartite_graph(std::span<const VariableId> vars,
                                             std::span<const ConstraintId> cons,
                                             const Model& model) {
  return detail::build_incidence(vars, cons, model, true);
}

// ---------------------------------------------------------------------------
// Maximum matching (Hopcroft-Karp)

/// Maximum-cardinality matching by Hopcroft-Karp, O((n_v + n_e) sqrt(n_v)).
/// Free variables are processed in node order and adjacency is scanned in
/// edge order, so the result is deterministic. Pairs are returned in
/// variable order.
inline Matching maximum_matching(const IncidenceGraph& g) {
  constexpr std::uint32_t kFree = std::numeric_limits<std::uint32_t>::max();
  constexpr std::uint32_t kInf = std::numeric_limits<std::uint32_t>::max();
  const auto nv = static_cast<std::uint32_t>(g.vars().size());
  const auto nc = static_cast<std::uint32_t>(g.cons().size());

  std::vector<std::vector<std::uint32_t>> adj(nv);
  for (std::uint32_t v = 0; v < nv; ++v)
    for (std::uint32_t e : g.var_edges(v)) adj[v].push_back(g.edges()[e].con);

  std::vector<std::uint32_t> var_match(nv, kFree), con_match(nc, kFree);
  std::vector<std::uint32_t> dist(nv);

  auto bfs = [&]() {
    std::vector<std::uint32_t> queue;
    queue.reserve(nv);
    for (std::uint32_t v = 0; v < nv; ++v) {
      if (var_match[v] == kFree) {
        dist[v] = 0;
        queue.push_back(v);
      } else {
        dist[v] = kInf;
      }
    }
    bool found = false;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const std::uint32_t v = queue[head];
      for (std::uint32_t c : adj[v]) {
        const std::uint32_t w = con_match[c];
        if (w == kFree) {
          found = true;
        } else if (dist[w] == kInf) {
          dist[w] = dist[v] + 1;
          queue.push_back(w);
        }
      }
    }
    return found;
  };

  // Iterative layered DFS from one free variable.
  std::vector<std::size_t> cursor(nv);
  auto dfs = [&](std::uint32_t root) {
    std::vector<std::uint32_t> path{root};
    while (!path.empty()) {
      const std::uint32_t v = path.back();
      bool advanced = false;
      while (cursor[v] < adj[v].size()) {
        const std::uint32_t c = adj[v][cursor[v]];
        const std::uint32_t w = con_match[c];
        if (w == kFree) {
          // Augment along the stack: each path[i] takes the constraint its
          // cursor points at.
          for (std::size_t i = path.size(); i-- > 0;) {
            const std::uint32_t u = path[i];
            const std::uint32_t cu = adj[u][cursor[u]];
            var_match[u] = cu;
            con_match[cu] = u;
          }
          return true;
        }
        if (dist[w] == dist[v] + 1) {
          path.push_back(w);
          advanced = true;
          break;
        }
        ++cursor[v];
      }
      if (advanced) continue;
      dist[v] = kInf;
      path.pop_back();
      if (!path.empty()) ++cursor[path.back()];
    }
    return false;
  };

  while (bfs()) {
    std::fill(cursor.begin(), cursor.end(), 0);
    for (std::uint32_t v = 0; v < nv; ++v)
      if (var_match[v] == kFree) dfs(v);
  }

  Matching out;
  for (std::uint32_t v = 0; v < nv; ++v)
    if (var_match[v] != kFree)
      out.push_back(MatchedEdge{g.vars()[v], g.cons()[var_match[v]]});
  return out;
}

/// Subgraph induced by the endpoints of `m`: those nodes (in the order of
/// `g`) and every edge of `g`, linear or not, between them.
inline IncidenceGraph induced_subgraph(const IncidenceGraph& g,
                                       const Matching& m) {
  std::unordered_set<VariableId> vs;
  std::unordered_set<ConstraintId> cs;
  for (const auto& e : m) {
    if (!g.find_edge(e.var, e.con))
      throw ContractError("matched pair (#" + std::to_string(e.var.value) +
                          ", #" + std::to_string(e.con.value) +
                          ") is not an edge of the graph");
    vs.insert(e.var);
    cs.insert(e.con);
  }
  std::vector<VariableId> vars;
  std::vector<ConstraintId> cons;
  for (VariableId v : g.vars())
    if (vs.count(v)) vars.push_back(v);
  for (ConstraintId c : g.cons())
    if (cs.count(c)) cons.push_back(c);

  IncidenceGraph out(vars, cons);
  for (const auto& e : g.edges()) {
    const VariableId v = g.vars()[e.var];
    const ConstraintId c = g.cons()[e.con];
    if (vs.count(v) && cs.count(c)) out.add_edge(v, c, e.linear);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Directed graph subroutines

/// Adjacency-list digraph on nodes 0..n-1.
using Digraph = std::vector<std::vector<std::uint32_t>>;

/// Position of the constraint matched with each variable of `g`; throws
/// ContractError unless `m` is a perfect matching of `g`.
inline std::vector<std::uint32_t> perfect_matching_positions(
    const IncidenceGraph& g, const Matching& m) {
  const std::size_t n = g.vars().size();
  if (g.cons().size() != n || m.size() != n)
    throw ContractError("matching is not perfect: " + std::to_string(m.size()) +
                        " pairs for " + std::to_string(n) + " variables and " +
                        std::to_string(g.cons().size()) + " constraints");
  constexpr std::uint32_t kUnset = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> matched(n, kUnset);
  std::vector<char> con_used(n, 0);
  for (const auto& e : m) {
    const auto vp = g.var_position(e.var);
    const auto cp = g.con_position(e.con);
    if (!vp || !cp || !g.find_edge(e.var, e.con))
      throw ContractError("matched pair is not an edge of the graph");
    if (matched[*vp] != kUnset || con_used[*cp])
      throw ContractError("matching shares a node");
    matched[*vp] = *cp;
    con_used[*cp] = 1;
  }
  return matched;
}

/// Projects `g` onto its variable nodes: for each variable a matched with
/// constraint b, an edge (a', a) for every other variable a' in b. Edges
/// are in (a, a') scan order; self-loops are dropped.
inline Digraph project(const IncidenceGraph& g, const Matching& m) {
  const std::vector<std::uint32_t> matched = perfect_matching_positions(g, m);
  Digraph d(g.vars().size());
  for (std::uint32_t a = 0; a < matched.size(); ++a)
    for (std::uint32_t e : g.con_edges(matched[a])) {
      const std::uint32_t other = g.edges()[e].var;
      if (other != a) d[other].push_back(a);
    }
  return d;
}

/// Strongly connected components by an iterative Tarjan. Components come
/// out in reverse topological order; nodes within one are sorted.
inline std::vector<std::vector<std::uint32_t>> strongly_connected_components(
    const Digraph& d) {
  constexpr std::uint32_t kUnvisited = std::numeric_limits<std::uint32_t>::max();
  const auto n = static_cast<std::uint32_t>(d.size());
  std::vector<std::uint32_t> index(n, kUnvisited), low(n, 0);
  std::vector<char> on_stack(n, 0);
  std::vector<std::uint32_t> stack;
  std::vector<std::pair<std::uint32_t, std::size_t>> call;  // node, next edge
  std::vector<std::vector<std::uint32_t>> comps;
  std::uint32_t counter = 0;

  for (std::uint32_t root = 0; root < n; ++root) {
    if (index[root] != kUnvisited) continue;
    call.emplace_back(root, 0);
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      auto& [v, next] = call.back();
      if (next < d[v].size()) {
        const std::uint32_t w = d[v][next++];
        if (index[w] == kUnvisited) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.emplace_back(w, 0);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      const std::uint32_t done = v;
      call.pop_back();
      if (!call.empty()) {
        const std::uint32_t parent = call.back().first;
        low[parent] = std::min(low[parent], low[done]);
      }
      if (low[done] == index[done]) {
        std::vector<std::uint32_t> comp;
        std::uint32_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp.push_back(w);
        } while (w != done);
        std::sort(comp.begin(), comp.end());
        comps.push_back(std::move(comp));
      }
    }
  }
  return comps;
}

/// Contracts each component of `comps` (a partition of the nodes of `d`)
/// into one node; keeps one edge per ordered pair of distinct components.
inline Digraph compress(const Digraph& d,
                        const std::vector<std::vector<std::uint32_t>>& comps) {
  constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> owner(d.size(), kNone);
  for (std::uint32_t k = 0; k < comps.size(); ++k)
    for (std::uint32_t u : comps[k]) {
      if (u >= d.size() || owner[u] != kNone)
        throw ContractError("components do not partition the graph");
      owner[u] = k;
    }
  if (std::find(owner.begin(), owner.end(), kNone) != owner.end())
    throw ContractError("components do not partition the graph");

  Digraph out(comps.size());
  std::vector<std::uint32_t> seen(comps.size(), kNone);
  for (std::uint32_t k = 0; k < comps.size(); ++k)
    for (std::uint32_t u : comps[k])
      for (std::uint32_t v : d[u]) {
        const std::uint32_t other = owner[v];
        if (other != k && seen[other] != k) {
          seen[other] = k;
          out[k].push_back(other);
        }
      }
  return out;
}

/// Kahn's algorithm with a FIFO ready queue. Nodes that become ready
/// together enter the queue in increasing `key` order. Throws ContractError
/// if `dag` has a cycle.
inline std::vector<std::uint32_t> topological_sort(
    const Digraph& dag, std::span<const std::uint32_t> key) {
  const std::size_t n = dag.size();
  std::vector<std::uint32_t> indegree(n, 0);
  for (const auto& succ : dag)
    for (std::uint32_t v : succ) ++indegree[v];
  auto by_key = [&](std::uint32_t a, std::uint32_t b) {
    return key[a] != key[b] ? key[a] < key[b] : a < b;
  };

  std::vector<std::uint32_t> queue;
  for (std::uint32_t v = 0; v < n; ++v)
    if (indegree[v] == 0) queue.push_back(v);
  std::sort(queue.begin(), queue.end(), by_key);
  for (std::size_t head = 0; head < queue.size(); ++head) {
    std::vector<std::uint32_t> ready;
    for (std::uint32_t v : dag[queue[head]])
      if (--indegree[v] == 0) ready.push_back(v);
    std::sort(ready.begin(), ready.end(), by_key);
    queue.insert(queue.end(), ready.begin(), ready.end());
  }
  if (queue.size() != n) throw ContractError("graph has a cycle");
  return queue;
}

/// Irreducible block lower triangular partition of a perfect matching:
/// project onto variables, take strongly connected components, compress
/// them to a DAG, order it topologically and map each variable back to its
/// matched constraint. Blocks list their pairs in variable order.
inline BlockPartition block_triangularize(const IncidenceGraph& g,
                                          const Matching& m) {
  const std::vector<std::uint32_t> matched = perfect_matching_positions(g, m);
  const Digraph d = project(g, m);
  const auto comps = strongly_connected_components(d);
  const Digraph dag = compress(d, comps);
  std::vector<std::uint32_t> key(comps.size());
  for (std::size_t k = 0; k < comps.size(); ++k) key[k] = comps[k].front();
  const auto order = topological_sort(dag, key);

  BlockPartition blocks;
  blocks.reserve(order.size());
  for (std::uint32_t k : order) {
    std::vector<MatchedEdge> block;
    for (std::uint32_t a : comps[k])
      block.push_back(MatchedEdge{g.vars()[a], g.cons()[matched[a]]});
    blocks.push_back(std::move(block));
  }
  return blocks;
}

// ---------------------------------------------------------------------------
// Debug dump

/// Coordinate-list dump of a model's incidence: one "row col flag" line per
/// edge, rows indexing equalities then inequalities, columns indexing
/// variables, flag "linear" or "nonlinear".
inline std::string incidence_coordinates(const Model& m) {
  std::vector<ConstraintId> cons = m.equality_ids();
  for (const auto& c : m.inequalities) cons.push_back(c.id);
  const std::vector<VariableId> vars = m.variable_ids();
  const IncidenceGraph g = bipartite_graph(vars, cons, m);
  std::ostringstream os;
  os << "% rows " << cons.size() << " cols " << vars.size() << " nnz "
     << g.edges().size() << "\n";
  for (std::uint32_t c = 0; c < cons.size(); ++c) {
    std::vector<IncidenceEdge> row;
    for (std::uint32_t e : g.con_edges(c)) row.push_back(g.edges()[e]);
    std::sort(row.begin(), row.end(),
              [](const auto& a, const auto& b) { return a.var < b.var; });
    for (const auto& e : row)
      os << e.con << " " << e.var << " " << (e.linear ? "linear" : "nonlinear")
         << "\n";
  }
  return os.str();
}

}  // namespace varagg
