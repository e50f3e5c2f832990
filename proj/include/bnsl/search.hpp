#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "bnsl/bde.hpp"
#include "bnsl/dataset.hpp"
#include "bnsl/localfit.hpp"
#include "bnsl/mdl.hpp"
#include "bnsl/network.hpp"

namespace bnsl {

enum class ScoreKind { Mdl, Bde };

enum class MoveKind { Add, Remove, Reverse };

struct Move {
  MoveKind kind = MoveKind::Add;
  int from = -1;
  int to = -1;
  bool operator==(const Move&) const = default;
};

inline std::string move_to_string(const Move& m, const VariableTable& vars) {
  const char* kind = m.kind == MoveKind::Add      ? "add"
                     : m.kind == MoveKind::Remove ? "remove"
                                                  : "reverse";
  return std::string(kind) + ":" + vars.name(m.from) + "->" +
         vars.name(m.to);
}

// All single-edge moves legal on the graph, in canonical order: kind
// (Add, Remove, Reverse), then source index, then target index. A move is
// legal when the resulting graph is acyclic.
inline std::vector<Move> neighbor_moves(const Dag& dag) {
  const int n = dag.size();
  std::vector<Move> moves;

  // Descendant sets: adding u -> v creates a cycle iff u is reachable
  // from v.
  const auto children = dag.children();
  std::vector<std::vector<char>> desc(n, std::vector<char>(n, 0));
  for (int v = 0; v < n; ++v) {
    std::vector<int> stack{v};
    desc[v][v] = 1;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int c : children[u])
        if (!desc[v][c]) {
          desc[v][c] = 1;
          stack.push_back(c);
        }
    }
  }

  for (int from = 0; from < n; ++from)
    for (int to = 0; to < n; ++to)
      if (from != to && !dag.has_edge(from, to) && !desc[to][from])
        moves.push_back({MoveKind::Add, from, to});
  for (int from = 0; from < n; ++from)
    for (int to = 0; to < n; ++to)
      if (dag.has_edge(from, to))
        moves.push_back({MoveKind::Remove, from, to});
  for (int from = 0; from < n; ++from)
    for (int to = 0; to < n; ++to)
      if (dag.has_edge(from, to) &&
          !has_directed_path(dag.without_edge(from, to), from, to))
        moves.push_back({MoveKind::Reverse, from, to});
  return moves;
}

struct SearchConfig {
  CptKind mode = CptKind::Table;
  ScoreKind score = ScoreKind::Mdl;
  double equivalent_sample_size = 1.0;
  // Bayesian prior network; null means the uninformative default.
  const BayesianNetwork* prior_network = nullptr;
  PriorOptions prior_options;
  int max_parents = 0;  // 0: unlimited
};

// Fits families on demand and memoizes them by (child, parent set); parent
// lists arriving from search DAGs are always sorted, so the vector itself is
// the canonical key.
class FamilyLearner {
 public:
  FamilyLearner(const Dataset& ds, const SearchConfig& cfg)
      : ds_(ds), cfg_(cfg) {
    if (cfg.score == ScoreKind::Bde) {
      if (cfg.prior_network) {
        prior_ = PriorSpec{*cfg.prior_network, cfg.equivalent_sample_size};
      } else {
        prior_ = uninformative_prior(ds.vars, cfg.equivalent_sample_size);
      }
    }
  }

  const Dataset& data() const { return ds_; }
  const SearchConfig& config() const { return cfg_; }

  std::shared_ptr<const FittedFamily> fit(
      int child, const std::vector<int>& parents) const {
    std::vector<int> key;
    key.reserve(parents.size() + 1);
    key.push_back(child);
    key.insert(key.end(), parents.begin(), parents.end());
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;

    std::shared_ptr<const FittedFamily> fitted;
    if (cfg_.score == ScoreKind::Bde) {
      BdeFamilyObjective obj(prior_, child, parents, cfg_.prior_options);
      fitted = std::make_shared<FittedFamily>(
          learn_local(ds_, child, parents, cfg_.mode, obj));
    } else {
      fitted = std::make_shared<FittedFamily>(
          learn_local(ds_, child, parents, cfg_.mode));
    }
    cache_.emplace(std::move(key), fitted);
    return fitted;
  }

  void clear_cache() const { cache_.clear(); }

 private:
  const Dataset& ds_;
  SearchConfig cfg_;
  PriorSpec prior_;
  mutable std::map<std::vector<int>, std::shared_ptr<const FittedFamily>>
      cache_;
};

// A point in the search: graph, fitted family per node, and the objective
// total (graph bits plus family bits).
struct SearchState {
  Dag dag;
  std::vector<std::shared_ptr<const FittedFamily>> fitted;
  double total_bits = 0.0;
};

inline double state_total(const Dag& dag,
                          const std::vector<std::shared_ptr<const FittedFamily>>&
                              fitted) {
  double total = dl_graph(dag);
  for (const auto& f : fitted) total += f->objective_bits;
  return total;
}

inline SearchState initial_state(const FamilyLearner& learner, int n) {
  SearchState st;
  st.dag = Dag(n);
  st.fitted.reserve(n);
  for (int v = 0; v < n; ++v) st.fitted.push_back(learner.fit(v, {}));
  st.total_bits = state_total(st.dag, st.fitted);
  return st;
}

// Objective change if `move` were applied: refit only the touched families,
// plus the graph-encoding change of log2(n) bits per parent-list entry.
inline double score_move(const SearchState& state, const Move& move,
                         const FamilyLearner& learner) {
  const double lg = std::log2(static_cast<double>(state.dag.size()));
  switch (move.kind) {
    case MoveKind::Add: {
      const Dag next = state.dag.with_edge(move.from, move.to);
      const auto f = learner.fit(move.to, next.parents(move.to));
      return f->objective_bits - state.fitted[move.to]->objective_bits + lg;
    }
    case MoveKind::Remove: {
      const Dag next = state.dag.without_edge(move.from, move.to);
      const auto f = learner.fit(move.to, next.parents(move.to));
      return f->objective_bits - state.fitted[move.to]->objective_bits - lg;
    }
    case MoveKind::Reverse: {
      const Dag next = state.dag.with_edge_reversed(move.from, move.to);
      const auto fv = learner.fit(move.to, next.parents(move.to));
      const auto fu = learner.fit(move.from, next.parents(move.from));
      return fv->objective_bits + fu->objective_bits -
             state.fitted[move.to]->objective_bits -
             state.fitted[move.from]->objective_bits;
    }
  }
  return 0.0;
}

struct TraceEntry {
  int iteration = 0;
  Move move;
  double delta_bits = 0.0;
  double total_bits = 0.0;
};

struct SearchResult {
  BayesianNetwork network;
  NetworkScore score;      // MDL breakdown of the final network
  double objective_bits = 0.0;
  double initial_bits = 0.0;
  std::vector<TraceEntry> trace;
};

// Two moves whose computed deltas are closer than this count as tied, and a
// gain smaller than this is no gain at all. Score totals are sums of many
// rounded terms, so mathematically equal alternatives (an edge and its
// reversal, say) surface with noise-level differences; the canonical move
// order must decide those, not the rounding noise.
inline constexpr double kMoveTieBits = 1e-6;

// Greedy hill climbing from the empty graph. Each round scores every legal
// move and applies the one with the largest strict decrease; ties keep the
// earliest move in canonical order. Stops at a local optimum.
inline SearchResult hill_climb(const Dataset& ds, const SearchConfig& cfg) {
  if (ds.num_rows < 1)
    throw EmptyDatasetError("structure search needs at least one row");
  const int n = ds.vars.size();
  FamilyLearner learner(ds, cfg);
  SearchState state = initial_state(learner, n);

  SearchResult result;
  result.initial_bits = state.total_bits;
  int iteration = 0;
  while (true) {
    double best_delta = 0.0;
    const Move* best = nullptr;
    const auto moves = neighbor_moves(state.dag);
    for (const auto& move : moves) {
      if (cfg.max_parents > 0) {
        const int target = move.kind == MoveKind::Reverse ? move.from : move.to;
        const bool grows = move.kind != MoveKind::Remove;
        if (grows &&
            state.dag.parent_count(target) + 1 > cfg.max_parents)
          continue;
      }
      const double delta = score_move(state, move, learner);
      if (delta < best_delta - kMoveTieBits) {
        best_delta = delta;
        best = &move;
      }
    }
    if (!best) break;

    const Move move = *best;
    switch (move.kind) {
      case MoveKind::Add:
        state.dag = state.dag.with_edge(move.from, move.to);
        state.fitted[move.to] =
            learner.fit(move.to, state.dag.parents(move.to));
        break;
      case MoveKind::Remove:
        state.dag = state.dag.without_edge(move.from, move.to);
        state.fitted[move.to] =
            learner.fit(move.to, state.dag.parents(move.to));
        break;
      case MoveKind::Reverse:
        state.dag = state.dag.with_edge_reversed(move.from, move.to);
        state.fitted[move.to] =
            learner.fit(move.to, state.dag.parents(move.to));
        state.fitted[move.from] =
            learner.fit(move.from, state.dag.parents(move.from));
        break;
    }
    state.total_bits = state_total(state.dag, state.fitted);
    ++iteration;
    result.trace.push_back({iteration, move, best_delta, state.total_bits});
  }

  result.network.vars = ds.vars;
  result.network.dag = state.dag;
  for (int v = 0; v < n; ++v) {
    result.network.locals.push_back(state.fitted[v]->ls);
    result.network.params.push_back(state.fitted[v]->params);
  }
  result.score = network_score(ds, result.network);
  result.objective_bits = state.total_bits;
  return result;
}

}  // namespace bnsl
