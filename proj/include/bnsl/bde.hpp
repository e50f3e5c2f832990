#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <unordered_map>
#include <vector>

#include "bnsl/dataset.hpp"
#include "bnsl/evaluator.hpp"
#include "bnsl/localfit.hpp"
#include "bnsl/mdl.hpp"
#include "bnsl/network.hpp"
#include "bnsl/sampling.hpp"

namespace bnsl {

// Bayesian family scoring. Dirichlet priors over each partition's parameters
// are induced by a prior network and an equivalent sample size: a partition
// covering event v gets total pseudo-count ess * P(v) under the prior
// network, spread according to the prior conditional of the child.

struct PriorSpec {
  BayesianNetwork network;
  double equivalent_sample_size = 1.0;
};

// Default prior: empty graph, every node uniform.
inline PriorSpec uninformative_prior(const VariableTable& vars, double ess) {
  PriorSpec spec;
  spec.network.vars = vars;
  spec.network.dag = Dag(vars.size());
  for (int v = 0; v < vars.size(); ++v) {
    spec.network.locals.emplace_back(FullTable{});
    CptParams p(vars.cardinality(v));
    p.set(0, std::vector<double>(vars.cardinality(v),
                                 1.0 / vars.cardinality(v)));
    spec.network.params.push_back(std::move(p));
  }
  spec.equivalent_sample_size = ess;
  return spec;
}

struct PriorOptions {
  std::uint64_t enumeration_cap = std::uint64_t(1) << 20;
  std::int64_t mc_samples = 1'000'000;
  std::uint64_t mc_seed = 0x5EEDB00D5EEDB00Dull;
};

// Joint prior probability P(child = x, parents = config) for every parent
// configuration, computed exactly by enumerating the ancestral closure when
// it is small enough and otherwise estimated by forward sampling.
struct ConfigMoments {
  int child_card = 0;
  double config_count = 0.0;
  bool monte_carlo = false;
  bool dense = false;
  std::vector<double> dense_probs;  // rank-major, child value minor
  std::unordered_map<std::uint64_t, std::vector<double>> sparse_probs;

  // Per-child-value probabilities of one configuration (zeros when absent).
  std::vector<double> probs(std::uint64_t rank) const {
    if (dense) {
      return {dense_probs.begin() + rank * child_card,
              dense_probs.begin() + (rank + 1) * child_card};
    }
    auto it = sparse_probs.find(rank);
    if (it == sparse_probs.end())
      return std::vector<double>(child_card, 0.0);
    return it->second;
  }
};

// Nodes whose value can influence the family under the prior network: the
// family itself plus all its ancestors.
inline std::vector<int> ancestral_closure(const Dag& dag,
                                          std::vector<int> seeds) {
  std::vector<char> in(dag.size(), 0);
  std::vector<int> stack;
  for (int s : seeds)
    if (!in[s]) {
      in[s] = 1;
      stack.push_back(s);
    }
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int p : dag.parents(v))
      if (!in[p]) {
        in[p] = 1;
        stack.push_back(p);
      }
  }
  std::vector<int> closure;
  for (int v = 0; v < dag.size(); ++v)
    if (in[v]) closure.push_back(v);
  return closure;
}

inline ConfigMoments prior_config_moments(const PriorSpec& spec, int child,
                                          const std::vector<int>& parents,
                                          const PriorOptions& opts = {}) {
  const BayesianNetwork& prior = spec.network;
  validate_network(prior);
  const VariableTable& vars = prior.vars;

  ConfigMoments cm;
  cm.child_card = vars.cardinality(child);
  cm.config_count = parent_config_count(vars, parents);

  std::vector<int> seeds = parents;
  seeds.push_back(child);
  const std::vector<int> closure = ancestral_closure(prior.dag, seeds);
  double states = 1.0;
  for (int v : closure) states *= vars.cardinality(v);

  const auto strides = config_strides(vars, parents);
  auto rank_of_row = [&](std::span<const std::uint8_t> row) {
    std::uint64_t r = 0;
    for (std::size_t i = 0; i < parents.size(); ++i)
      r += strides[i] * row[parents[i]];
    return r;
  };

  if (states <= static_cast<double>(opts.enumeration_cap)) {
    // Exact: iterate all assignments of the closure; the closure is
    // ancestrally closed, so the product of its local conditionals is its
    // exact joint marginal.
    cm.dense = true;
    const std::uint64_t n_cfg = parent_config_count_checked(vars, parents);
    cm.dense_probs.assign(n_cfg * cm.child_card, 0.0);
    std::vector<PartitionIndexer> indexers;
    indexers.reserve(closure.size());
    for (int v : closure)
      indexers.emplace_back(vars, prior.dag.parents(v), prior.locals[v]);
    std::vector<std::uint8_t> row(vars.size(), 0);
    bool done = false;
    while (!done) {
      double w = 1.0;
      for (std::size_t i = 0; i < closure.size(); ++i) {
        const int v = closure[i];
        w *= prior.params[v].dist(indexers[i].from_row(row))[row[v]];
        if (w == 0.0) break;
      }
      if (w > 0.0)
        cm.dense_probs[rank_of_row(row) * cm.child_card + row[child]] += w;
      // odometer over the closure variables
      done = true;
      for (int v : closure) {
        if (++row[v] < vars.cardinality(v)) {
          done = false;
          break;
        }
        row[v] = 0;
      }
    }
  } else {
    cm.monte_carlo = true;
    CompiledNetwork compiled(prior);
    SplitMix64 rng(opts.mc_seed);
    std::vector<std::uint8_t> row(vars.size());
    const double unit = 1.0 / static_cast<double>(opts.mc_samples);
    for (std::int64_t s = 0; s < opts.mc_samples; ++s) {
      compiled.sample_row(rng, row);
      auto [it, fresh] = cm.sparse_probs.try_emplace(rank_of_row(row));
      if (fresh) it->second.assign(cm.child_card, 0.0);
      it->second[row[child]] += unit;
    }
  }
  return cm;
}

// Dirichlet prior over one partition's parameter vector.
struct PartitionPrior {
  std::vector<double> expected_dist;
  double pseudo_count = 0.0;
  bool monte_carlo = false;
};

// Priors for every partition of the family's local structure, aggregated
// from the per-configuration moments. A partition with no prior mass gets
// pseudo-count zero and a uniform expectation.
inline std::vector<PartitionPrior> family_partition_priors(
    const PriorSpec& spec, int child, const std::vector<int>& parents,
    const LocalStructure& ls, const PriorOptions& opts = {}) {
  const VariableTable& vars = spec.network.vars;
  const ConfigMoments cm = prior_config_moments(spec, child, parents, opts);
  PartitionIndexer indexer(vars, parents, ls);
  const std::uint64_t n_parts = indexer.count();
  if (n_parts > opts.enumeration_cap)
    throw StateSpaceTooLargeError("too many partitions to enumerate priors");

  const int cx = cm.child_card;
  std::vector<std::vector<double>> moments(
      n_parts, std::vector<double>(cx, 0.0));
  if (cm.dense) {
    const std::uint64_t n_cfg = parent_config_count_checked(vars, parents);
    for (std::uint64_t rank = 0; rank < n_cfg; ++rank) {
      const auto config = config_from_rank(vars, parents, rank);
      auto& m = moments[indexer(config)];
      for (int x = 0; x < cx; ++x)
        m[x] += cm.dense_probs[rank * cx + x];
    }
  } else {
    for (const auto& [rank, probs] : cm.sparse_probs) {
      const auto config = config_from_rank(vars, parents, rank);
      auto& m = moments[indexer(config)];
      for (int x = 0; x < cx; ++x) m[x] += probs[x];
    }
  }

  std::vector<PartitionPrior> priors(n_parts);
  for (std::uint64_t pid = 0; pid < n_parts; ++pid) {
    PartitionPrior& p = priors[pid];
    p.monte_carlo = cm.monte_carlo;
    double mass = 0.0;
    for (double m : moments[pid]) mass += m;
    if (mass <= 0.0) {
      p.pseudo_count = 0.0;
      p.expected_dist.assign(cx, 1.0 / cx);
    } else {
      p.pseudo_count = spec.equivalent_sample_size * mass;
      p.expected_dist.resize(cx);
      for (int x = 0; x < cx; ++x) p.expected_dist[x] = moments[pid][x] / mass;
    }
  }
  return priors;
}

inline PartitionPrior partition_prior(const PriorSpec& spec, int child,
                                      const std::vector<int>& parents,
                                      const LocalStructure& ls,
                                      std::uint64_t pid,
                                      const PriorOptions& opts = {}) {
  const auto priors = family_partition_priors(spec, child, parents, ls, opts);
  if (pid >= priors.size())
    throw ValidationError("partition id out of range");
  return priors[pid];
}

namespace detail {

// log2 of the Dirichlet-multinomial marginal of one cell:
//   Gamma(W) / Gamma(W + N) * prod_x Gamma(w_x + n_x) / Gamma(w_x)
// Returns -inf when data falls where the prior has no mass.
inline double cell_log2_marginal(std::span<const std::int64_t> counts,
                                 double pseudo_count,
                                 std::span<const double> expected) {
  std::int64_t n = 0;
  for (std::int64_t c : counts) n += c;
  if (n == 0) return 0.0;
  if (pseudo_count <= 0.0) return -std::numeric_limits<double>::infinity();
  double nats = std::lgamma(pseudo_count) -
                std::lgamma(pseudo_count + static_cast<double>(n));
  for (std::size_t x = 0; x < counts.size(); ++x) {
    if (counts[x] == 0) continue;
    const double w = pseudo_count * expected[x];
    if (w <= 0.0) return -std::numeric_limits<double>::infinity();
    nats += std::lgamma(w + static_cast<double>(counts[x])) - std::lgamma(w);
  }
  return nats / std::log(2.0);
}

}  // namespace detail

// log2 marginal likelihood of one family's data. With equivalent sample
// size zero the prior is a point of no information and the marginal reduces
// to the maximum-likelihood code: -dl_data at the cell frequencies.
inline double family_log_marginal(const FamilyCounts& counts,
                                  const std::vector<PartitionPrior>& priors,
                                  double equivalent_sample_size) {
  if (equivalent_sample_size == 0.0) {
    double bits = 0.0;
    for (const auto& [pid, cell] : counts.cells) bits += entropy_bits(cell);
    return -bits;
  }
  if (priors.size() != counts.partitions)
    throw ValidationError("one prior required per partition");
  double bits = 0.0;
  for (const auto& [pid, cell] : counts.cells) {
    const PartitionPrior& p = priors[pid];
    const double term =
        detail::cell_log2_marginal(cell, p.pseudo_count, p.expected_dist);
    if (term == -std::numeric_limits<double>::infinity())
      return -std::numeric_limits<double>::infinity();
    bits += term;
  }
  return bits;
}

// log2 of the unnormalized posterior of the network given the data: the
// structure prior charges two raised to minus the description length of the
// graph and of each local structure; parameters are integrated out.
inline double log_posterior_score(const Dataset& ds,
                                  const BayesianNetwork& net,
                                  const PriorSpec& spec,
                                  const PriorOptions& opts = {}) {
  if (!(ds.vars == net.vars))
    throw SchemaMismatchError("dataset and network use different variables");
  if (!(ds.vars == spec.network.vars))
    throw SchemaMismatchError("prior network uses different variables");
  double bits = -dl_graph(net.dag);
  for (int v = 0; v < net.vars.size(); ++v) {
    const auto& parents = net.dag.parents(v);
    const auto& ls = net.locals[v];
    const FamilyCounts counts = family_counts(ds, v, parents, ls);
    if (const auto* dt = std::get_if<DefaultTable>(&ls)) {
      bits -= dl_default_structure(parent_config_count(net.vars, parents),
                                   static_cast<std::int64_t>(dt->rows.size()),
                                   net.vars.cardinality(v), ds.num_rows)
                  .structure_bits;
    } else if (const auto* tree = std::get_if<DecisionTree>(&ls)) {
      bits -= dl_tree_structure(*tree, static_cast<int>(parents.size()));
    }
    const auto priors = family_partition_priors(spec, v, parents, ls, opts);
    bits += family_log_marginal(counts, priors,
                                spec.equivalent_sample_size);
  }
  return bits;
}

// Family objective driven by the Dirichlet marginal: structure bits stay the
// description-length encodings, each cell costs -log2 of its marginal.
// Lets the local-structure learners and the graph search optimize the
// Bayesian posterior instead of MDL.
class BdeFamilyObjective final : public FamilyObjective {
 public:
  BdeFamilyObjective(const PriorSpec& spec, int child,
                     const std::vector<int>& parents,
                     const PriorOptions& opts = {})
      : ess_(spec.equivalent_sample_size),
        cx_(spec.network.vars.cardinality(child)),
        moments_(prior_config_moments(spec, child, parents, opts)) {}

  bool tracks_cells() const override { return ess_ != 0.0; }

  Cell total_cell(bool with_ranks) const override {
    Cell cell;
    cell.moments.assign(cx_, 0.0);
    if (moments_.dense) {
      const auto n_cfg =
          static_cast<std::uint64_t>(moments_.config_count);
      for (std::uint64_t r = 0; r < n_cfg; ++r)
        for (int x = 0; x < cx_; ++x)
          cell.moments[x] += moments_.dense_probs[r * cx_ + x];
      if (with_ranks) {
        cell.ranks.resize(n_cfg);
        for (std::uint64_t r = 0; r < n_cfg; ++r)
          cell.ranks[r] = static_cast<std::uint32_t>(r);
      }
    } else {
      if (with_ranks)
        throw StateSpaceTooLargeError(
            "prior state space too large for tree learning");
      for (const auto& [rank, probs] : moments_.sparse_probs)
        for (int x = 0; x < cx_; ++x) cell.moments[x] += probs[x];
    }
    for (double m : cell.moments) cell.mass += m;
    return cell;
  }

  Cell config_cell(std::uint64_t rank) const override {
    Cell cell;
    cell.moments = moments_.probs(rank);
    for (double m : cell.moments) cell.mass += m;
    return cell;
  }

  void accumulate_config(std::uint64_t rank, Cell& into) const override {
    const auto probs = moments_.probs(rank);
    for (int x = 0; x < cx_; ++x) {
      into.moments[x] += probs[x];
      into.mass += probs[x];
    }
  }

  void subtract_config(std::uint64_t rank, Cell& from) const override {
    const auto probs = moments_.probs(rank);
    for (int x = 0; x < cx_; ++x) {
      from.moments[x] -= probs[x];
      from.mass -= probs[x];
    }
  }

  double cell_bits(std::span<const std::int64_t> counts,
                   const Cell& cell) const override {
    if (ess_ == 0.0) return entropy_bits(counts);
    std::int64_t n = 0;
    for (std::int64_t c : counts) n += c;
    if (n == 0) return 0.0;
    const double w = ess_ * cell.mass;
    if (w <= 0.0) return std::numeric_limits<double>::infinity();
    // cell.moments are joint prior probabilities; normalize to the cell.
    double nats = std::lgamma(w) - std::lgamma(w + static_cast<double>(n));
    for (std::size_t x = 0; x < counts.size(); ++x) {
      if (counts[x] == 0) continue;
      const double wx = ess_ * cell.moments[x];
      if (wx <= 0.0) return std::numeric_limits<double>::infinity();
      nats += std::lgamma(wx + static_cast<double>(counts[x])) -
              std::lgamma(wx);
    }
    return -nats / std::log(2.0);
  }

 private:
  double ess_;
  int cx_;
  ConfigMoments moments_;
};

}  // namespace bnsl
