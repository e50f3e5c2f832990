#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "bnsl/error.hpp"
#include "bnsl/local_structure.hpp"
#include "bnsl/variables.hpp"

namespace bnsl {

// Complete discrete dataset over a variable table, stored row-major with one
// byte per cell (value index). No missing values.
struct Dataset {
  VariableTable vars;
  std::int64_t num_rows = 0;
  std::vector<std::uint8_t> cells;

  std::uint8_t at(std::int64_t row, int var) const {
    return cells[static_cast<std::size_t>(row) * vars.size() + var];
  }
  std::span<const std::uint8_t> row(std::int64_t r) const {
    return {cells.data() + static_cast<std::size_t>(r) * vars.size(),
            static_cast<std::size_t>(vars.size())};
  }

  static Dataset from_rows(VariableTable vars,
                           const std::vector<std::vector<std::uint8_t>>& rows) {
    Dataset ds;
    ds.vars = std::move(vars);
    ds.num_rows = static_cast<std::int64_t>(rows.size());
    ds.cells.reserve(rows.size() * ds.vars.size());
    for (const auto& r : rows) {
      if (static_cast<int>(r.size()) != ds.vars.size())
        throw MalformedRowError("row length does not match variable table");
      for (int v = 0; v < ds.vars.size(); ++v)
        if (r[v] >= ds.vars.cardinality(v))
          throw ValidationError("value index out of range");
      ds.cells.insert(ds.cells.end(), r.begin(), r.end());
    }
    return ds;
  }
};

// Child-value counts per partition of one family. `cells` lists the occupied
// partitions in ascending id order; for default tables and trees every
// partition is materialized (including zero rows), while full tables keep
// only the observed configurations and report the rest as zeros via at().
struct FamilyCounts {
  int child = -1;
  int child_card = 0;
  std::uint64_t partitions = 0;
  std::int64_t total = 0;
  std::vector<std::pair<std::uint64_t, std::vector<std::int64_t>>> cells;

  const std::vector<std::int64_t>* find(std::uint64_t pid) const {
    auto it = std::lower_bound(
        cells.begin(), cells.end(), pid,
        [](const auto& cell, std::uint64_t id) { return cell.first < id; });
    if (it == cells.end() || it->first != pid) return nullptr;
    return &it->second;
  }

  std::vector<std::int64_t> at(std::uint64_t pid) const {
    if (const auto* c = find(pid)) return *c;
    return std::vector<std::int64_t>(child_card, 0);
  }
};

// Probability of a conjunctive event under the empirical distribution:
// event is a list of (variable, value) pairs.
inline double empirical_prob(
    const Dataset& ds,
    std::span<const std::pair<int, std::uint8_t>> event) {
  if (ds.num_rows < 1) throw EmptyDatasetError("empirical_prob on empty data");
  std::int64_t hits = 0;
  for (std::int64_t r = 0; r < ds.num_rows; ++r) {
    bool match = true;
    for (const auto& [var, val] : event)
      if (ds.at(r, var) != val) {
        match = false;
        break;
      }
    hits += match;
  }
  return static_cast<double>(hits) / static_cast<double>(ds.num_rows);
}

// Counts child values per parent configuration (full-table view), returned
// in ascending configuration rank. This is the single data scan most of the
// learners run on.
inline std::vector<std::pair<std::uint64_t, std::vector<std::int64_t>>>
config_counts(const Dataset& ds, int child, const std::vector<int>& parents) {
  const int cx = ds.vars.cardinality(child);
  const auto strides = config_strides(ds.vars, parents);
  std::unordered_map<std::uint64_t, std::vector<std::int64_t>> acc;
  for (std::int64_t r = 0; r < ds.num_rows; ++r) {
    const auto row = ds.row(r);
    std::uint64_t rank = 0;
    for (std::size_t i = 0; i < parents.size(); ++i)
      rank += strides[i] * row[parents[i]];
    auto [it, fresh] = acc.try_emplace(rank);
    if (fresh) it->second.assign(cx, 0);
    ++it->second[row[child]];
  }
  std::vector<std::pair<std::uint64_t, std::vector<std::int64_t>>> cells(
      std::make_move_iterator(acc.begin()), std::make_move_iterator(acc.end()));
  std::sort(cells.begin(), cells.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return cells;
}

// Aggregates child-value counts into the partitions of a local structure.
inline FamilyCounts family_counts(const Dataset& ds, int child,
                                  const std::vector<int>& parents,
                                  const LocalStructure& ls) {
  PartitionIndexer indexer(ds.vars, parents, ls);
  FamilyCounts fc;
  fc.child = child;
  fc.child_card = ds.vars.cardinality(child);
  fc.partitions = indexer.count();
  fc.total = ds.num_rows;

  std::unordered_map<std::uint64_t, std::vector<std::int64_t>> acc;
  const bool materialize_all = cpt_kind(ls) != CptKind::Table;
  if (materialize_all)
    for (std::uint64_t pid = 0; pid < fc.partitions; ++pid)
      acc.try_emplace(pid, std::vector<std::int64_t>(fc.child_card, 0));
  for (std::int64_t r = 0; r < ds.num_rows; ++r) {
    const auto row = ds.row(r);
    auto [it, fresh] = acc.try_emplace(indexer.from_row(row));
    if (fresh) it->second.assign(fc.child_card, 0);
    ++it->second[row[child]];
  }
  fc.cells.assign(std::make_move_iterator(acc.begin()),
                  std::make_move_iterator(acc.end()));
  std::sort(fc.cells.begin(), fc.cells.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return fc;
}

// Same aggregation starting from precomputed per-configuration counts
// (avoids rescanning the data when a learner already holds them).
inline FamilyCounts family_counts_from_configs(
    const VariableTable& vars,
    const std::vector<std::pair<std::uint64_t, std::vector<std::int64_t>>>&
        configs,
    int child, const std::vector<int>& parents, const LocalStructure& ls) {
  PartitionIndexer indexer(vars, parents, ls);
  FamilyCounts fc;
  fc.child = child;
  fc.child_card = vars.cardinality(child);
  fc.partitions = indexer.count();

  std::unordered_map<std::uint64_t, std::vector<std::int64_t>> acc;
  if (cpt_kind(ls) != CptKind::Table)
    for (std::uint64_t pid = 0; pid < fc.partitions; ++pid)
      acc.try_emplace(pid, std::vector<std::int64_t>(fc.child_card, 0));
  for (const auto& [rank, counts] : configs) {
    const auto config = config_from_rank(vars, parents, rank);
    auto [it, fresh] = acc.try_emplace(indexer(config));
    if (fresh) it->second.assign(fc.child_card, 0);
    for (int x = 0; x < fc.child_card; ++x) {
      it->second[x] += counts[x];
      fc.total += counts[x];
    }
  }
  fc.cells.assign(std::make_move_iterator(acc.begin()),
                  std::make_move_iterator(acc.end()));
  std::sort(fc.cells.begin(), fc.cells.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return fc;
}

}  // namespace bnsl
