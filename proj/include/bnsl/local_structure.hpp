#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "bnsl/error.hpp"
#include "bnsl/variables.hpp"

namespace bnsl {

// A local structure describes how a node's conditional distribution depends
// on its parents: it partitions the parent configurations into groups that
// share one probability vector. Partition ids are dense 0-based indices.

// One partition per parent configuration. The id of a configuration is its
// mixed-radix rank with the first parent most significant (i.e. ranks are in
// lexicographic order of the configuration tuples).
struct FullTable {
  bool operator==(const FullTable&) const = default;
};

// A few explicitly listed parent configurations; every other configuration
// shares the default partition. Row i is partition i; the default partition
// id is rows.size().
struct DefaultTable {
  // Each row assigns a value to every parent, in parent-list order.
  std::vector<std::vector<std::uint8_t>> rows;
  bool operator==(const DefaultTable&) const = default;
};

// Decision tree over parent tests. test_slot indexes the node's parent list
// (not the global variable table); children are ordered by tested value.
// A node with test_slot < 0 is a leaf. Leaves are numbered depth-first,
// children in value order, so partition ids follow the leaf preorder.
struct TreeNode {
  int test_slot = -1;
  std::vector<TreeNode> children;
  bool is_leaf() const { return test_slot < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct DecisionTree {
  TreeNode root;
  bool operator==(const DecisionTree&) const = default;
};

using LocalStructure = std::variant<FullTable, DefaultTable, DecisionTree>;

enum class CptKind { Table, Default, Tree };

inline CptKind cpt_kind(const LocalStructure& ls) {
  if (std::holds_alternative<FullTable>(ls)) return CptKind::Table;
  if (std::holds_alternative<DefaultTable>(ls)) return CptKind::Default;
  return CptKind::Tree;
}

inline const char* cpt_kind_name(CptKind k) {
  switch (k) {
    case CptKind::Table: return "table";
    case CptKind::Default: return "default";
    case CptKind::Tree: return "tree";
  }
  return "?";
}

// ---- Parent configuration helpers ----------------------------------------

// Number of parent configurations as a double (exact below 2^53; beyond that
// only score formulas need it and they are astronomically large anyway).
inline double parent_config_count(const VariableTable& vars,
                                  const std::vector<int>& parents) {
  double m = 1.0;
  for (int p : parents) m *= vars.cardinality(p);
  return m;
}

inline double log2_parent_configs(const VariableTable& vars,
                                  const std::vector<int>& parents) {
  double bits = 0.0;
  for (int p : parents) bits += std::log2(double(vars.cardinality(p)));
  return bits;
}

// Exact configuration count; throws when it cannot be ranked in 64 bits.
inline std::uint64_t parent_config_count_checked(
    const VariableTable& vars, const std::vector<int>& parents) {
  std::uint64_t m = 1;
  for (int p : parents) {
    const std::uint64_t c = vars.cardinality(p);
    if (m > (std::uint64_t(1) << 62) / c)
      throw StateSpaceTooLargeError("too many parent configurations to rank");
    m *= c;
  }
  return m;
}

// Strides for the mixed-radix rank; strides[i] multiplies the value of the
// i-th parent and the first parent is the most significant digit.
inline std::vector<std::uint64_t> config_strides(
    const VariableTable& vars, const std::vector<int>& parents) {
  parent_config_count_checked(vars, parents);
  std::vector<std::uint64_t> s(parents.size(), 1);
  for (int i = static_cast<int>(parents.size()) - 2; i >= 0; --i)
    s[i] = s[i + 1] * vars.cardinality(parents[i + 1]);
  return s;
}

inline std::uint64_t config_rank(const VariableTable& vars,
                                 const std::vector<int>& parents,
                                 std::span<const std::uint8_t> config) {
  auto strides = config_strides(vars, parents);
  std::uint64_t r = 0;
  for (std::size_t i = 0; i < parents.size(); ++i)
    r += strides[i] * config[i];
  return r;
}

inline std::vector<std::uint8_t> config_from_rank(
    const VariableTable& vars, const std::vector<int>& parents,
    std::uint64_t rank) {
  std::vector<std::uint8_t> config(parents.size());
  for (int i = static_cast<int>(parents.size()) - 1; i >= 0; --i) {
    const std::uint64_t c = vars.cardinality(parents[i]);
    config[i] = static_cast<std::uint8_t>(rank % c);
    rank /= c;
  }
  return config;
}

// ---- Tree helpers ---------------------------------------------------------

inline int tree_leaf_count(const TreeNode& node) {
  if (node.is_leaf()) return 1;
  int total = 0;
  for (const TreeNode& c : node.children) total += tree_leaf_count(c);
  return total;
}

inline int tree_internal_count(const TreeNode& node) {
  if (node.is_leaf()) return 0;
  int total = 1;
  for (const TreeNode& c : node.children) total += tree_internal_count(c);
  return total;
}

// ---- Validation and partition semantics -----------------------------------

namespace detail {

inline void validate_tree_node(const TreeNode& node,
                               const VariableTable& vars,
                               const std::vector<int>& parents,
                               std::vector<char>& on_path) {
  if (node.is_leaf()) {
    if (!node.children.empty())
      throw ValidationError("leaf node with children");
    return;
  }
  const int p = static_cast<int>(parents.size());
  if (node.test_slot >= p)
    throw ValidationError("tree tests a slot beyond the parent list");
  if (on_path[node.test_slot])
    throw ValidationError("tree repeats a test along a path");
  const int card = vars.cardinality(parents[node.test_slot]);
  if (static_cast<int>(node.children.size()) != card)
    throw ValidationError("tree node must have one child per tested value");
  on_path[node.test_slot] = 1;
  for (const TreeNode& c : node.children)
    validate_tree_node(c, vars, parents, on_path);
  on_path[node.test_slot] = 0;
}

}  // namespace detail

inline void validate_local_structure(const VariableTable& vars,
                                     const std::vector<int>& parents,
                                     const LocalStructure& ls) {
  for (int p : parents)
    if (p < 0 || p >= vars.size())
      throw ValidationError("parent index out of range");
  if (const auto* dt = std::get_if<DefaultTable>(&ls)) {
    const std::uint64_t m = parent_config_count_checked(vars, parents);
    if (dt->rows.size() + 1 > m)
      throw ValidationError(
          "default table must leave at least one configuration implicit");
    std::unordered_map<std::uint64_t, int> seen;
    for (const auto& row : dt->rows) {
      if (row.size() != parents.size())
        throw ValidationError("default table row must assign every parent");
      for (std::size_t i = 0; i < row.size(); ++i)
        if (row[i] >= vars.cardinality(parents[i]))
          throw ValidationError("default table row value out of range");
      if (!seen.emplace(config_rank(vars, parents, row), 0).second)
        throw ValidationError("default table repeats a row");
    }
  } else if (const auto* tree = std::get_if<DecisionTree>(&ls)) {
    std::vector<char> on_path(parents.size(), 0);
    detail::validate_tree_node(tree->root, vars, parents, on_path);
  }
}

// Maps parent configurations to partition ids; built once per family and
// reused for batch counting, sampling, and scoring.
class PartitionIndexer {
 public:
  PartitionIndexer(const VariableTable& vars, const std::vector<int>& parents,
                   const LocalStructure& ls)
      : parents_(parents) {
    validate_local_structure(vars, parents, ls);
    strides_ = config_strides(vars, parents);
    if (const auto* dt = std::get_if<DefaultTable>(&ls)) {
      kind_ = Kind::kDefault;
      for (std::size_t i = 0; i < dt->rows.size(); ++i)
        row_of_rank_.emplace(config_rank(vars, parents, dt->rows[i]),
                             static_cast<std::uint32_t>(i));
      count_ = dt->rows.size() + 1;
    } else if (const auto* tree = std::get_if<DecisionTree>(&ls)) {
      kind_ = Kind::kTree;
      std::uint64_t next_leaf = 0;
      flatten(tree->root, next_leaf);
      count_ = next_leaf;
    } else {
      kind_ = Kind::kFull;
      count_ = parent_config_count_checked(vars, parents);
    }
  }

  std::uint64_t count() const { return count_; }

  // config holds the parent values in parent-list order.
  std::uint64_t operator()(std::span<const std::uint8_t> config) const {
    switch (kind_) {
      case Kind::kFull:
        return rank_of(config);
      case Kind::kDefault: {
        auto it = row_of_rank_.find(rank_of(config));
        return it == row_of_rank_.end() ? count_ - 1 : it->second;
      }
      case Kind::kTree: {
        int i = 0;
        while (flat_[i].test_slot >= 0)
          i = child_index_[flat_[i].children_base + config[flat_[i].test_slot]];
        return flat_[i].leaf_id;
      }
    }
    return 0;
  }

  // Same, reading the parents straight out of a full dataset row.
  std::uint64_t from_row(std::span<const std::uint8_t> row) const {
    switch (kind_) {
      case Kind::kFull: {
        std::uint64_t r = 0;
        for (std::size_t i = 0; i < parents_.size(); ++i)
          r += strides_[i] * row[parents_[i]];
        return r;
      }
      case Kind::kDefault: {
        std::uint64_t r = 0;
        for (std::size_t i = 0; i < parents_.size(); ++i)
          r += strides_[i] * row[parents_[i]];
        auto it = row_of_rank_.find(r);
        return it == row_of_rank_.end() ? count_ - 1 : it->second;
      }
      case Kind::kTree: {
        int i = 0;
        while (flat_[i].test_slot >= 0)
          i = child_index_[flat_[i].children_base +
                           row[parents_[flat_[i].test_slot]]];
        return flat_[i].leaf_id;
      }
    }
    return 0;
  }

 private:
  enum class Kind { kFull, kDefault, kTree };

  struct FlatNode {
    int test_slot = -1;        // < 0: leaf
    int children_base = 0;     // offset into child_index_
    std::uint64_t leaf_id = 0;
  };

  std::uint64_t rank_of(std::span<const std::uint8_t> config) const {
    std::uint64_t r = 0;
    for (std::size_t i = 0; i < parents_.size(); ++i)
      r += strides_[i] * config[i];
    return r;
  }

  // Depth-first flatten; leaves are numbered in preorder (children visited
  // in value order), which defines the tree's partition ids.
  int flatten(const TreeNode& node, std::uint64_t& next_leaf) {
    const int idx = static_cast<int>(flat_.size());
    flat_.push_back({});
    if (node.is_leaf()) {
      flat_[idx].leaf_id = next_leaf++;
      return idx;
    }
    flat_[idx].test_slot = node.test_slot;
    std::vector<int> slots;
    slots.reserve(node.children.size());
    for (const TreeNode& child : node.children)
      slots.push_back(flatten(child, next_leaf));
    flat_[idx].children_base = static_cast<int>(child_index_.size());
    child_index_.insert(child_index_.end(), slots.begin(), slots.end());
    return idx;
  }

  std::vector<int> parents_;
  Kind kind_ = Kind::kFull;
  std::vector<std::uint64_t> strides_;
  std::unordered_map<std::uint64_t, std::uint32_t> row_of_rank_;
  std::vector<FlatNode> flat_;
  std::vector<int> child_index_;
  std::uint64_t count_ = 1;
};

inline std::uint64_t partition_count(const VariableTable& vars,
                                     const std::vector<int>& parents,
                                     const LocalStructure& ls) {
  return PartitionIndexer(vars, parents, ls).count();
}

inline std::uint64_t partition_of(const VariableTable& vars,
                                  const std::vector<int>& parents,
                                  const LocalStructure& ls,
                                  std::span<const std::uint8_t> config) {
  return PartitionIndexer(vars, parents, ls)(config);
}

// Free parameters of the family: one probability vector per partition, each
// with cardinality(child) - 1 degrees of freedom.
inline std::int64_t structure_param_count(const VariableTable& vars,
                                          const std::vector<int>& parents,
                                          const LocalStructure& ls,
                                          int child) {
  const std::uint64_t parts = partition_count(vars, parents, ls);
  return static_cast<std::int64_t>(parts) * (vars.cardinality(child) - 1);
}

}  // namespace bnsl
