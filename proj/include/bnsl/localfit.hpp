#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "bnsl/dataset.hpp"
#include "bnsl/mdl.hpp"

namespace bnsl {

// The learners below minimize structure bits plus a per-partition cell cost.
// Under MDL the cell cost is parameter precision plus the entropy code of
// the cell's data; a Bayesian objective can substitute the negative log
// marginal likelihood of the cell instead. Cells optionally carry prior
// information (mass and per-value moments) aggregated over the parent
// configurations they cover.
class FamilyObjective {
 public:
  struct Cell {
    double mass = 0.0;
    std::vector<double> moments;       // per child value; sums to mass
    std::vector<std::uint32_t> ranks;  // configs covered (tree cells only)
  };

  virtual ~FamilyObjective() = default;

  // False when cells carry no prior state and may stay empty (MDL).
  virtual bool tracks_cells() const = 0;

  // Cell covering every parent configuration. `with_ranks` materializes the
  // rank list (needed only to grow trees).
  virtual Cell total_cell(bool with_ranks) const = 0;

  // Cell covering a single configuration.
  virtual Cell config_cell(std::uint64_t rank) const = 0;

  // Adds one configuration's prior contribution to a cell (not its rank).
  virtual void accumulate_config(std::uint64_t rank, Cell& into) const = 0;

  // Removes one configuration's prior contribution.
  virtual void subtract_config(std::uint64_t rank, Cell& from) const = 0;

  // Cost in bits of one partition cell holding these child counts.
  virtual double cell_bits(std::span<const std::int64_t> counts,
                           const Cell& cell) const = 0;
};

// MDL cost: half a log2 N per free parameter, plus the entropy code of the
// cell. Prior cells are ignored.
class MdlObjective final : public FamilyObjective {
 public:
  MdlObjective(int child_card, std::int64_t n)
      : per_cell_param_bits_(0.5 * (child_card - 1) * log2_or_zero(n)) {}

  bool tracks_cells() const override { return false; }
  Cell total_cell(bool) const override { return {}; }
  Cell config_cell(std::uint64_t) const override { return {}; }
  void accumulate_config(std::uint64_t, Cell&) const override {}
  void subtract_config(std::uint64_t, Cell&) const override {}

  double cell_bits(std::span<const std::int64_t> counts,
                   const Cell&) const override {
    return per_cell_param_bits_ + entropy_bits(counts);
  }

 private:
  double per_cell_param_bits_;
};

// One family fitted on one dataset: chosen structure, maximum-likelihood
// parameters, the MDL breakdown at those parameters, and the total under
// the objective that drove learning (identical to score.total_bits for MDL).
struct FittedFamily {
  LocalStructure ls;
  CptParams params;
  FamilyScore score;
  double objective_bits = 0.0;
};

// Maximum-likelihood parameters: each partition's cell frequencies; cells
// with no data get the uniform vector.
inline CptParams fit_params(const FamilyCounts& counts) {
  CptParams params(counts.child_card);
  for (const auto& [pid, cell] : counts.cells) {
    std::int64_t total = 0;
    for (std::int64_t c : cell) total += c;
    if (total == 0) continue;  // reads back as uniform
    std::vector<double> dist(counts.child_card);
    for (int x = 0; x < counts.child_card; ++x)
      dist[x] = static_cast<double>(cell[x]) / static_cast<double>(total);
    params.set(pid, std::move(dist));
  }
  return params;
}

namespace detail {

// Everything the learners need about one family, derived from one data scan.
struct FamilyContext {
  const VariableTable& vars;
  int child;
  int cx;
  std::vector<int> parents;
  std::vector<int> slot_cards;
  std::vector<std::uint64_t> strides;
  std::int64_t n;
  double m;  // number of parent configurations
  std::vector<std::pair<std::uint64_t, std::vector<std::int64_t>>> configs;

  FamilyContext(const Dataset& ds, int child_, std::vector<int> parents_)
      : vars(ds.vars),
        child(child_),
        cx(ds.vars.cardinality(child_)),
        parents(std::move(parents_)),
        strides(config_strides(ds.vars, parents)),
        n(ds.num_rows),
        m(parent_config_count(ds.vars, parents)),
        configs(config_counts(ds, child_, parents)) {
    for (int p : parents) slot_cards.push_back(ds.vars.cardinality(p));
  }

  int num_slots() const { return static_cast<int>(parents.size()); }
  int value_at(std::uint64_t rank, int slot) const {
    return static_cast<int>((rank / strides[slot]) % slot_cards[slot]);
  }
};

inline void add_counts(std::vector<std::int64_t>& into,
                       const std::vector<std::int64_t>& from) {
  for (std::size_t i = 0; i < into.size(); ++i) into[i] += from[i];
}

inline void sub_counts(std::vector<std::int64_t>& into,
                       const std::vector<std::int64_t>& from) {
  for (std::size_t i = 0; i < into.size(); ++i) into[i] -= from[i];
}

inline bool is_constant(const std::vector<std::int64_t>& counts) {
  int nonzero = 0;
  for (std::int64_t c : counts) nonzero += c > 0;
  return nonzero <= 1;
}

// Assembles the fitted family once a structure has been chosen: aggregate
// counts into its partitions, fit frequencies, and price both scores.
inline FittedFamily finish_family(const FamilyContext& ctx,
                                  const FamilyObjective& obj,
                                  LocalStructure ls) {
  FittedFamily out;
  out.ls = std::move(ls);
  const FamilyCounts counts = family_counts_from_configs(
      ctx.vars, ctx.configs, ctx.child, ctx.parents, out.ls);
  out.params = fit_params(counts);
  out.score = family_score_from_counts(ctx.vars, counts, ctx.parents, out.ls,
                                       ctx.child);

  // Objective total: structure bits plus each partition's cell cost. For a
  // full table, partitions are configurations; unobserved ones cost nothing
  // under a Bayesian objective but still carry MDL parameter bits, which
  // dl_table_params already prices in closed form.
  if (cpt_kind(out.ls) == CptKind::Table) {
    if (!obj.tracks_cells()) {
      out.objective_bits = out.score.total_bits;
    } else {
      double bits = 0.0;
      for (const auto& [rank, cell] : counts.cells)
        bits += obj.cell_bits(cell, obj.config_cell(rank));
      out.objective_bits = bits;
    }
    return out;
  }

  double bits = out.score.structure_bits;
  if (const auto* dt = std::get_if<DefaultTable>(&out.ls)) {
    FamilyObjective::Cell def = obj.total_cell(false);
    for (std::uint64_t i = 0; i < dt->rows.size(); ++i) {
      const std::uint64_t rank =
          config_rank(ctx.vars, ctx.parents, dt->rows[i]);
      bits += obj.cell_bits(counts.at(i), obj.config_cell(rank));
      obj.subtract_config(rank, def);
    }
    bits += obj.cell_bits(counts.at(dt->rows.size()), def);
  } else {
    // Tree: recover each leaf's cell by splitting the total cell down the
    // tree; mirrors the partition ids (preorder).
    const auto& tree = std::get<DecisionTree>(out.ls);
    std::uint64_t next_leaf = 0;
    auto walk = [&](auto&& self, const TreeNode& node,
                    FamilyObjective::Cell cell) -> void {
      if (node.is_leaf()) {
        bits += obj.cell_bits(counts.at(next_leaf++), cell);
        return;
      }
      const int slot = node.test_slot;
      std::vector<FamilyObjective::Cell> parts(node.children.size());
      if (obj.tracks_cells()) {
        for (auto& p : parts) p.moments.assign(ctx.cx, 0.0);
        for (std::uint32_t rank : cell.ranks) {
          auto& p = parts[ctx.value_at(rank, slot)];
          p.ranks.push_back(rank);
          obj.accumulate_config(rank, p);
        }
      }
      for (std::size_t v = 0; v < node.children.size(); ++v)
        self(self, node.children[v], std::move(parts[v]));
    };
    walk(walk, tree.root, obj.total_cell(obj.tracks_cells()));
  }
  out.objective_bits = bits;
  return out;
}

// Greedy default-table construction: start from the bare default partition
// and repeatedly promote the observed configuration whose promotion shrinks
// the family total the most, stopping when no promotion helps (or when only
// the default partition may remain implicit). Ties prefer the lowest rank.
inline FittedFamily learn_default_table_impl(const FamilyContext& ctx,
                                             const FamilyObjective& obj) {
  const std::size_t n_configs = ctx.configs.size();
  std::vector<char> chosen(n_configs, 0);
  std::vector<std::int64_t> def_counts(ctx.cx, 0);
  for (const auto& [rank, cell] : ctx.configs) add_counts(def_counts, cell);
  FamilyObjective::Cell def_cell = obj.total_cell(false);

  std::int64_t k = 0;
  double def_bits = obj.cell_bits(def_counts, def_cell);
  while (static_cast<double>(k) < ctx.m - 1.0) {
    const double row_choice_delta =
        log2_binomial(ctx.m, k + 1) - log2_binomial(ctx.m, k);
    double best_delta = 0.0;
    std::size_t best = n_configs;
    for (std::size_t i = 0; i < n_configs; ++i) {
      if (chosen[i]) continue;
      const auto& [rank, cell] = ctx.configs[i];
      FamilyObjective::Cell cfg_cell = obj.config_cell(rank);
      std::vector<std::int64_t> rest = def_counts;
      sub_counts(rest, cell);
      FamilyObjective::Cell rest_cell = def_cell;
      obj.subtract_config(rank, rest_cell);
      const double delta = row_choice_delta + obj.cell_bits(cell, cfg_cell) +
                           obj.cell_bits(rest, rest_cell) - def_bits;
      if (delta < best_delta) {
        best_delta = delta;
        best = i;
      }
    }
    if (best == n_configs) break;
    chosen[best] = 1;
    sub_counts(def_counts, ctx.configs[best].second);
    obj.subtract_config(ctx.configs[best].first, def_cell);
    def_bits = obj.cell_bits(def_counts, def_cell);
    ++k;
  }

  DefaultTable dt;
  for (std::size_t i = 0; i < n_configs; ++i)  // ascending rank
    if (chosen[i])
      dt.rows.push_back(
          config_from_rank(ctx.vars, ctx.parents, ctx.configs[i].first));
  return finish_family(ctx, obj, LocalStructure(dt));
}

struct GrowCell {
  std::vector<std::uint32_t> config_idx;  // indices into ctx.configs
  std::vector<std::int64_t> counts;
  FamilyObjective::Cell cell;
};

// Maximal growth: split every leaf unless it has no instances, the child is
// constant in its subset, or every parent is already tested on the path.
// The split variable minimizes the family total after the split; ties take
// the lowest slot (parent-list order).
inline TreeNode grow_node(const FamilyContext& ctx, const FamilyObjective& obj,
                          GrowCell node, std::vector<char>& tested,
                          int depth) {
  const int p = ctx.num_slots();
  if (node.config_idx.empty() || is_constant(node.counts) || depth == p)
    return TreeNode{};

  const double log2_choices = std::log2(static_cast<double>(p - depth));
  double best_bits = std::numeric_limits<double>::infinity();
  int best_slot = -1;
  std::vector<GrowCell> best_children;
  for (int slot = 0; slot < p; ++slot) {
    if (tested[slot]) continue;
    const int card = ctx.slot_cards[slot];
    std::vector<GrowCell> children(card);
    for (auto& c : children) {
      c.counts.assign(ctx.cx, 0);
      if (obj.tracks_cells()) c.cell.moments.assign(ctx.cx, 0.0);
    }
    for (std::uint32_t idx : node.config_idx) {
      const std::uint64_t rank = ctx.configs[idx].first;
      auto& c = children[ctx.value_at(rank, slot)];
      c.config_idx.push_back(idx);
      add_counts(c.counts, ctx.configs[idx].second);
    }
    if (obj.tracks_cells()) {
      for (std::uint32_t rank : node.cell.ranks) {
        auto& c = children[ctx.value_at(rank, slot)];
        c.cell.ranks.push_back(rank);
        obj.accumulate_config(rank, c.cell);
      }
    }
    double bits = 1.0 + log2_choices;
    for (const auto& c : children) bits += 1.0 + obj.cell_bits(c.counts, c.cell);
    if (bits < best_bits) {
      best_bits = bits;
      best_slot = slot;
      best_children = std::move(children);
    }
  }

  TreeNode out;
  out.test_slot = best_slot;
  tested[best_slot] = 1;
  for (auto& child : best_children)
    out.children.push_back(
        grow_node(ctx, obj, std::move(child), tested, depth + 1));
  tested[best_slot] = 0;
  return out;
}

struct TrimResult {
  TreeNode node;
  std::vector<std::int64_t> counts;
  double bits = 0.0;  // representation length of the subtree, data included
};

// Bottom-up trim: replace a subtree by a leaf whenever the subtree's total
// representation length (structure at its in-tree depths, parameters, data)
// is at least the leaf's.
inline TrimResult trim_node(const FamilyContext& ctx,
                            const FamilyObjective& obj, const TreeNode& node,
                            GrowCell state, int depth) {
  if (node.is_leaf()) {
    TrimResult r;
    r.node = TreeNode{};
    r.counts = std::move(state.counts);
    r.bits = 1.0 + obj.cell_bits(r.counts, state.cell);
    return r;
  }

  const int slot = node.test_slot;
  const int card = ctx.slot_cards[slot];
  std::vector<GrowCell> children(card);
  for (auto& c : children) {
    c.counts.assign(ctx.cx, 0);
    if (obj.tracks_cells()) c.cell.moments.assign(ctx.cx, 0.0);
  }
  for (std::uint32_t idx : state.config_idx) {
    const std::uint64_t rank = ctx.configs[idx].first;
    auto& c = children[ctx.value_at(rank, slot)];
    c.config_idx.push_back(idx);
    add_counts(c.counts, ctx.configs[idx].second);
  }
  if (obj.tracks_cells()) {
    for (std::uint32_t rank : state.cell.ranks) {
      auto& c = children[ctx.value_at(rank, slot)];
      c.cell.ranks.push_back(rank);
      obj.accumulate_config(rank, c.cell);
    }
  }

  TrimResult r;
  r.node.test_slot = slot;
  r.counts.assign(ctx.cx, 0);
  double subtree_bits =
      1.0 + std::log2(static_cast<double>(ctx.num_slots() - depth));
  for (int v = 0; v < card; ++v) {
    TrimResult child =
        trim_node(ctx, obj, node.children[v], std::move(children[v]),
                  depth + 1);
    add_counts(r.counts, child.counts);
    subtree_bits += child.bits;
    r.node.children.push_back(std::move(child.node));
  }

  const double leaf_bits = 1.0 + obj.cell_bits(r.counts, state.cell);
  if (subtree_bits >= leaf_bits) {
    r.node = TreeNode{};
    r.bits = leaf_bits;
  } else {
    r.bits = subtree_bits;
  }
  return r;
}

inline GrowCell root_cell(const FamilyContext& ctx,
                          const FamilyObjective& obj) {
  GrowCell root;
  root.counts.assign(ctx.cx, 0);
  for (std::uint32_t i = 0; i < ctx.configs.size(); ++i) {
    root.config_idx.push_back(i);
    add_counts(root.counts, ctx.configs[i].second);
  }
  root.cell = obj.total_cell(obj.tracks_cells());
  return root;
}

}  // namespace detail

// Grows the maximal tree for the family (no trimming).
inline DecisionTree grow_tree(const Dataset& ds, int child,
                              const std::vector<int>& parents,
                              const FamilyObjective& obj) {
  detail::FamilyContext ctx(ds, child, parents);
  std::vector<char> tested(ctx.num_slots(), 0);
  DecisionTree tree;
  tree.root = detail::grow_node(ctx, obj, detail::root_cell(ctx, obj), tested,
                                0);
  return tree;
}

inline DecisionTree grow_tree(const Dataset& ds, int child,
                              const std::vector<int>& parents) {
  MdlObjective obj(ds.vars.cardinality(child), ds.num_rows);
  return grow_tree(ds, child, parents, obj);
}

// Trims a tree bottom-up against the family's data.
inline DecisionTree trim_tree(const DecisionTree& tree, const Dataset& ds,
                              int child, const std::vector<int>& parents,
                              const FamilyObjective& obj) {
  validate_local_structure(ds.vars, parents, LocalStructure(tree));
  detail::FamilyContext ctx(ds, child, parents);
  DecisionTree out;
  out.root = detail::trim_node(ctx, obj, tree.root,
                               detail::root_cell(ctx, obj), 0)
                 .node;
  return out;
}

inline DecisionTree trim_tree(const DecisionTree& tree, const Dataset& ds,
                              int child, const std::vector<int>& parents) {
  MdlObjective obj(ds.vars.cardinality(child), ds.num_rows);
  return trim_tree(tree, ds, child, parents, obj);
}

inline FittedFamily learn_default_table(const Dataset& ds, int child,
                                        const std::vector<int>& parents,
                                        const FamilyObjective& obj) {
  detail::FamilyContext ctx(ds, child, parents);
  return detail::learn_default_table_impl(ctx, obj);
}

inline FittedFamily learn_default_table(const Dataset& ds, int child,
                                        const std::vector<int>& parents) {
  MdlObjective obj(ds.vars.cardinality(child), ds.num_rows);
  return learn_default_table(ds, child, parents, obj);
}

// Learns the family's local structure in the requested representation and
// fits its maximum-likelihood parameters. Zero-parent nodes always get the
// one-partition full table.
inline FittedFamily learn_local(const Dataset& ds, int child,
                                const std::vector<int>& parents, CptKind mode,
                                const FamilyObjective& obj) {
  detail::FamilyContext ctx(ds, child, parents);
  if (parents.empty() || mode == CptKind::Table)
    return detail::finish_family(ctx, obj, LocalStructure(FullTable{}));
  if (mode == CptKind::Default)
    return detail::learn_default_table_impl(ctx, obj);
  std::vector<char> tested(ctx.num_slots(), 0);
  DecisionTree tree;
  tree.root = detail::grow_node(ctx, obj, detail::root_cell(ctx, obj), tested,
                                0);
  tree.root = detail::trim_node(ctx, obj, tree.root,
                                detail::root_cell(ctx, obj), 0)
                  .node;
  return detail::finish_family(ctx, obj, LocalStructure(tree));
}

inline FittedFamily learn_local(const Dataset& ds, int child,
                                const std::vector<int>& parents,
                                CptKind mode) {
  MdlObjective obj(ds.vars.cardinality(child), ds.num_rows);
  return learn_local(ds, child, parents, mode, obj);
}

}  // namespace bnsl
