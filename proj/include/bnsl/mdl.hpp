#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "bnsl/dataset.hpp"
#include "bnsl/local_structure.hpp"
#include "bnsl/network.hpp"

namespace bnsl {

// Description lengths, all in bits (base-2 logs throughout). A network's
// total length is the graph encoding, plus per family the encoding of the
// local structure, the parameters (half a bit per free parameter per log N),
// and the data given the parameters.

// log2 N clamped to zero for N <= 1: parameter precision is meaningless
// without data and the encoding charges nothing for it.
inline double log2_or_zero(std::int64_t n) {
  return n <= 1 ? 0.0 : std::log2(static_cast<double>(n));
}

// log2 of the binomial coefficient C(m, k); m may be fractional-free but
// huge, so it arrives as a double and lgamma does the work.
inline double log2_binomial(double m, std::int64_t k) {
  if (k < 0 || static_cast<double>(k) > m) return 0.0;
  return (std::lgamma(m + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
          std::lgamma(m - static_cast<double>(k) + 1.0)) /
         std::log(2.0);
}

// Entropy of a count vector in total bits: -sum c_x log2(c_x / total).
// Zero counts contribute nothing; an all-zero vector costs nothing.
inline double entropy_bits(std::span<const std::int64_t> counts) {
  std::int64_t total = 0;
  for (std::int64_t c : counts) total += c;
  if (total == 0) return 0.0;
  double bits = 0.0;
  const double lt = std::log2(static_cast<double>(total));
  for (std::int64_t c : counts)
    if (c > 0)
      bits -= static_cast<double>(c) *
              (std::log2(static_cast<double>(c)) - lt);
  return bits;
}

// Graph encoding: each node states its parent-set size and the set itself,
// 1 + |parents| numbers of log2(n) bits each.
inline double dl_graph(const Dag& dag) {
  const double lg = std::log2(static_cast<double>(dag.size()));
  double bits = 0.0;
  for (int v = 0; v < dag.size(); ++v)
    bits += (1.0 + dag.parent_count(v)) * lg;
  return bits;
}

// Parameter cost of a tabular CPT: half a log2 N per free parameter.
inline double dl_table_params(double parent_configs, int child_card,
                              std::int64_t n) {
  return 0.5 * parent_configs * (child_card - 1) * log2_or_zero(n);
}

struct DefaultStructureBits {
  double structure_bits = 0.0;
  double param_bits = 0.0;
};

// Default-table encoding: the number of explicit rows (log2 m), the choice
// of rows (log2 C(m, k)), and parameters for k + 1 partitions. k must leave
// at least the default partition implicit: 0 <= k <= m - 1.
inline DefaultStructureBits dl_default_structure(double parent_configs,
                                                 std::int64_t k,
                                                 int child_card,
                                                 std::int64_t n) {
  if (k < 0 || static_cast<double>(k) > parent_configs - 1.0)
    throw KOutOfRangeError("explicit row count k=" + std::to_string(k) +
                           " outside [0, m-1]");
  DefaultStructureBits out;
  out.structure_bits =
      std::log2(parent_configs) + log2_binomial(parent_configs, k);
  out.param_bits =
      0.5 * static_cast<double>(k + 1) * (child_card - 1) * log2_or_zero(n);
  return out;
}

namespace detail {

inline double dl_tree_node(const TreeNode& node, int num_parents, int depth) {
  if (node.is_leaf()) return 1.0;
  double bits = 1.0 + std::log2(static_cast<double>(num_parents - depth));
  for (const TreeNode& c : node.children)
    bits += dl_tree_node(c, num_parents, depth + 1);
  return bits;
}

}  // namespace detail

// Tree encoding: one bit per node marking leaf/internal, plus for each
// internal node at depth d the choice among the num_parents - d variables
// not yet tested on its path.
inline double dl_tree_structure(const DecisionTree& tree, int num_parents) {
  return detail::dl_tree_node(tree.root, num_parents, 0);
}

inline double dl_tree_params(const DecisionTree& tree, int child_card,
                             std::int64_t n) {
  return 0.5 * tree_leaf_count(tree.root) * (child_card - 1) *
         log2_or_zero(n);
}

// Code length of the child column given parameters: -sum over cells and
// values of count * log2(theta). A zero parameter with support is an
// infinite code.
inline double dl_data(const FamilyCounts& counts, const CptParams& params) {
  double bits = 0.0;
  for (const auto& [pid, cell] : counts.cells) {
    const auto& dist = params.dist(pid);
    for (int x = 0; x < counts.child_card; ++x) {
      if (cell[x] == 0) continue;
      if (dist[x] <= 0.0) return std::numeric_limits<double>::infinity();
      bits -= static_cast<double>(cell[x]) * std::log2(dist[x]);
    }
  }
  return bits;
}

// Empirical conditional entropy H(child | partition) in bits per instance;
// equals dl_data at the maximum-likelihood parameters divided by N.
inline double conditional_entropy(const FamilyCounts& counts) {
  if (counts.total < 1)
    throw EmptyDatasetError("conditional entropy of empty data");
  double bits = 0.0;
  for (const auto& [pid, cell] : counts.cells) bits += entropy_bits(cell);
  return bits / static_cast<double>(counts.total);
}

struct FamilyScore {
  double structure_bits = 0.0;
  double param_bits = 0.0;
  double data_bits = 0.0;
  double total_bits = 0.0;
};

namespace detail {

// Score from precomputed partition counts; data term is the entropy of each
// cell (maximum-likelihood parameters are the cell frequencies).
inline FamilyScore family_score_from_counts(const VariableTable& vars,
                                            const FamilyCounts& counts,
                                            const std::vector<int>& parents,
                                            const LocalStructure& ls,
                                            int child) {
  const int cx = vars.cardinality(child);
  const std::int64_t n = counts.total;
  FamilyScore s;
  if (const auto* dt = std::get_if<DefaultTable>(&ls)) {
    const double m = parent_config_count(vars, parents);
    const auto bits = dl_default_structure(
        m, static_cast<std::int64_t>(dt->rows.size()), cx, n);
    s.structure_bits = bits.structure_bits;
    s.param_bits = bits.param_bits;
  } else if (const auto* tree = std::get_if<DecisionTree>(&ls)) {
    s.structure_bits =
        dl_tree_structure(*tree, static_cast<int>(parents.size()));
    s.param_bits = dl_tree_params(*tree, cx, n);
  } else {
    s.structure_bits = 0.0;
    s.param_bits = dl_table_params(parent_config_count(vars, parents), cx, n);
  }
  for (const auto& [pid, cell] : counts.cells)
    s.data_bits += entropy_bits(cell);
  s.total_bits = s.structure_bits + s.param_bits + s.data_bits;
  return s;
}

}  // namespace detail

// Family score at the maximum-likelihood parameters for this structure.
inline FamilyScore family_score(const Dataset& ds, int child,
                                const std::vector<int>& parents,
                                const LocalStructure& ls) {
  validate_local_structure(ds.vars, parents, ls);
  const FamilyCounts counts = family_counts(ds, child, parents, ls);
  return detail::family_score_from_counts(ds.vars, counts, parents, ls,
                                          child);
}

struct NetworkScore {
  double graph_bits = 0.0;
  std::vector<FamilyScore> families;
  double total_bits = 0.0;
};

inline NetworkScore network_score(const Dataset& ds,
                                  const BayesianNetwork& net) {
  if (!(ds.vars == net.vars))
    throw SchemaMismatchError("dataset and network use different variables");
  NetworkScore s;
  s.graph_bits = dl_graph(net.dag);
  s.total_bits = s.graph_bits;
  for (int v = 0; v < net.vars.size(); ++v) {
    s.families.push_back(
        family_score(ds, v, net.dag.parents(v), net.locals[v]));
    s.total_bits += s.families.back().total_bits;
  }
  return s;
}

}  // namespace bnsl
