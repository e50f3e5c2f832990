#pragma once

#include <algorithm>
#include <queue>
#include <vector>

#include "bnsl/error.hpp"

namespace bnsl {

// Directed acyclic graph stored as per-node parent lists. Instances are
// value types: the edge operations return modified copies and never mutate
// the receiver, so search states can share and snapshot graphs freely.
//
// Parent lists added through with_edge stay sorted ascending; lists given to
// from_parent_lists keep their caller-specified order (a network file may
// fix the parent order its CPT rows are written in).
class Dag {
 public:
  Dag() = default;
  explicit Dag(int n) : parents_(n) {}

  static Dag from_parent_lists(std::vector<std::vector<int>> parents);

  int size() const { return static_cast<int>(parents_.size()); }
  const std::vector<int>& parents(int v) const { return parents_[v]; }
  int parent_count(int v) const {
    return static_cast<int>(parents_[v].size());
  }

  bool has_edge(int from, int to) const {
    const auto& p = parents_[to];
    return std::find(p.begin(), p.end(), from) != p.end();
  }

  int edge_count() const {
    int total = 0;
    for (const auto& p : parents_) total += static_cast<int>(p.size());
    return total;
  }

  // Children adjacency (ascending), derived from the parent lists.
  std::vector<std::vector<int>> children() const {
    std::vector<std::vector<int>> ch(parents_.size());
    for (int v = 0; v < size(); ++v)
      for (int u : parents_[v]) ch[u].push_back(v);
    for (auto& c : ch) std::sort(c.begin(), c.end());
    return ch;
  }

  Dag with_edge(int from, int to) const;
  Dag without_edge(int from, int to) const;
  Dag with_edge_reversed(int from, int to) const;

  bool operator==(const Dag&) const = default;

 private:
  void check_node(int v) const {
    if (v < 0 || v >= size()) throw ValidationError("node index out of range");
  }

  std::vector<std::vector<int>> parents_;
};

// Canonical topological order: repeatedly emit the lowest-index node whose
// parents are all emitted. Throws CyclicGraphError when no order exists.
inline std::vector<int> topological_order(const Dag& dag) {
  const int n = dag.size();
  std::vector<int> missing(n);
  for (int v = 0; v < n; ++v) missing[v] = dag.parent_count(v);
  auto children = dag.children();
  std::priority_queue<int, std::vector<int>, std::greater<int>> ready;
  for (int v = 0; v < n; ++v)
    if (missing[v] == 0) ready.push(v);
  std::vector<int> order;
  order.reserve(n);
  while (!ready.empty()) {
    int v = ready.top();
    ready.pop();
    order.push_back(v);
    for (int c : children[v])
      if (--missing[c] == 0) ready.push(c);
  }
  if (static_cast<int>(order.size()) != n)
    throw CyclicGraphError("graph contains a directed cycle");
  return order;
}

inline bool is_acyclic(const Dag& dag) {
  try {
    topological_order(dag);
    return true;
  } catch (const CyclicGraphError&) {
    return false;
  }
}

// True when a directed path from `from` to `to` exists (including the empty
// path when from == to). Iterative DFS over the children adjacency.
inline bool has_directed_path(const Dag& dag, int from, int to) {
  if (from == to) return true;
  auto children = dag.children();
  std::vector<char> seen(dag.size(), 0);
  std::vector<int> stack{from};
  seen[from] = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int c : children[v]) {
      if (c == to) return true;
      if (!seen[c]) {
        seen[c] = 1;
        stack.push_back(c);
      }
    }
  }
  return false;
}

inline Dag Dag::from_parent_lists(std::vector<std::vector<int>> parents) {
  Dag d;
  d.parents_ = std::move(parents);
  const int n = d.size();
  for (int v = 0; v < n; ++v) {
    std::vector<int> seen;
    for (int p : d.parents_[v]) {
      if (p < 0 || p >= n)
        throw ValidationError("parent index out of range");
      if (p == v) throw ValidationError("node listed as its own parent");
      if (std::find(seen.begin(), seen.end(), p) != seen.end())
        throw ValidationError("duplicate parent in list");
      seen.push_back(p);
    }
  }
  topological_order(d);  // throws CyclicGraphError on a cycle
  return d;
}

inline Dag Dag::with_edge(int from, int to) const {
  check_node(from);
  check_node(to);
  if (from == to) throw ValidationError("self edge");
  if (has_edge(from, to)) throw ValidationError("edge already present");
  if (has_directed_path(*this, to, from))
    throw CyclicGraphError("adding edge would create a cycle");
  Dag d = *this;
  auto& p = d.parents_[to];
  p.insert(std::upper_bound(p.begin(), p.end(), from), from);
  return d;
}

inline Dag Dag::without_edge(int from, int to) const {
  check_node(from);
  check_node(to);
  Dag d = *this;
  auto& p = d.parents_[to];
  auto it = std::find(p.begin(), p.end(), from);
  if (it == p.end()) throw ValidationError("edge not present");
  p.erase(it);
  return d;
}

inline Dag Dag::with_edge_reversed(int from, int to) const {
  return without_edge(from, to).with_edge(to, from);
}

}  // namespace bnsl
