#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <unordered_map>
#include <vector>

#include "bnsl/dag.hpp"
#include "bnsl/local_structure.hpp"
#include "bnsl/variables.hpp"

namespace bnsl {

// Per-node CPT parameters: one probability vector per partition id.
// Partitions never touched by data may be left unset; they read back as the
// uniform distribution, which is also what fitting an empty partition yields.
class CptParams {
 public:
  CptParams() = default;

  explicit CptParams(int cardinality)
      : card_(cardinality),
        uniform_(cardinality, 1.0 / cardinality) {
    if (cardinality < 2) throw ValidationError("cardinality must be >= 2");
  }

  int cardinality() const { return card_; }

  void set(std::uint64_t pid, std::vector<double> dist) {
    if (static_cast<int>(dist.size()) != card_)
      throw ValidationError("distribution length does not match cardinality");
    double sum = 0.0;
    for (double p : dist) {
      if (!(p >= 0.0) || !std::isfinite(p))
        throw ValidationError("probabilities must be finite and nonnegative");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw ValidationError("distribution must sum to 1");
    map_[pid] = std::move(dist);
  }

  bool has(std::uint64_t pid) const { return map_.contains(pid); }

  const std::vector<double>& dist(std::uint64_t pid) const {
    auto it = map_.find(pid);
    return it == map_.end() ? uniform_ : it->second;
  }

  const std::unordered_map<std::uint64_t, std::vector<double>>& entries()
      const {
    return map_;
  }

  bool operator==(const CptParams&) const = default;

 private:
  int card_ = 0;
  std::vector<double> uniform_;
  std::unordered_map<std::uint64_t, std::vector<double>> map_;
};

// A discrete Bayesian network: shared variable table, DAG, and per node a
// local structure plus its partition parameters.
struct BayesianNetwork {
  VariableTable vars;
  Dag dag;
  std::vector<LocalStructure> locals;
  std::vector<CptParams> params;
};

inline void validate_network(const BayesianNetwork& net) {
  const int n = net.vars.size();
  if (net.dag.size() != n)
    throw ValidationError("dag size does not match variable table");
  if (static_cast<int>(net.locals.size()) != n ||
      static_cast<int>(net.params.size()) != n)
    throw ValidationError("need one local structure and parameter set per node");
  topological_order(net.dag);  // throws on cycles
  for (int v = 0; v < n; ++v) {
    validate_local_structure(net.vars, net.dag.parents(v), net.locals[v]);
    if (net.params[v].cardinality() != net.vars.cardinality(v))
      throw ValidationError("parameter cardinality mismatch at node " +
                            net.vars.name(v));
    const std::uint64_t parts =
        partition_count(net.vars, net.dag.parents(v), net.locals[v]);
    for (const auto& [pid, dist] : net.params[v].entries())
      if (pid >= parts)
        throw ValidationError("parameter for nonexistent partition at node " +
                              net.vars.name(v));
  }
}

// Conditional distribution of `node` given a full assignment of its parents
// (values in parent-list order).
inline std::vector<double> conditional_dist(
    const BayesianNetwork& net, int node,
    std::span<const std::uint8_t> parent_config) {
  const std::uint64_t pid =
      partition_of(net.vars, net.dag.parents(node), net.locals[node],
                   parent_config);
  return net.params[node].dist(pid);
}

// log2 of the joint probability of a full assignment (one value per
// variable, table order). Returns -inf when any factor is zero.
inline double joint_log_prob(const BayesianNetwork& net,
                             std::span<const std::uint8_t> assignment) {
  double bits = 0.0;
  std::vector<std::uint8_t> config;
  for (int v = 0; v < net.vars.size(); ++v) {
    const auto& parents = net.dag.parents(v);
    config.clear();
    for (int p : parents) config.push_back(assignment[p]);
    const std::uint64_t pid =
        partition_of(net.vars, parents, net.locals[v], config);
    const double theta = net.params[v].dist(pid)[assignment[v]];
    if (theta <= 0.0) return -std::numeric_limits<double>::infinity();
    bits += std::log2(theta);
  }
  return bits;
}

// Free parameters actually carried by the network's local structures.
inline std::int64_t actual_param_count(const BayesianNetwork& net) {
  std::int64_t total = 0;
  for (int v = 0; v < net.vars.size(); ++v)
    total += structure_param_count(net.vars, net.dag.parents(v),
                                   net.locals[v], v);
  return total;
}

// Parameters the same DAG would need with plain tabular CPTs.
inline std::int64_t tabular_complexity(const Dag& dag,
                                       const VariableTable& vars) {
  std::int64_t total = 0;
  for (int v = 0; v < dag.size(); ++v) {
    const double m = parent_config_count(vars, dag.parents(v));
    if (m > 9.0e15)
      throw StateSpaceTooLargeError("tabular complexity overflows");
    total += static_cast<std::int64_t>(m) * (vars.cardinality(v) - 1);
  }
  return total;
}

// Joint state count of the full variable table, as a double.
inline double joint_state_count(const VariableTable& vars) {
  double m = 1.0;
  for (int v = 0; v < vars.size(); ++v) m *= vars.cardinality(v);
  return m;
}

}  // namespace bnsl
